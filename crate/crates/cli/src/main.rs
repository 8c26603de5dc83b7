use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ncharge::scenario::{self, compare, parse_config, RunOutcome};
use ncharge::{verify, Error};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  a verification check or comparison exceeded its tolerance
  2  invalid config or command line (the diagnostic names the key)
  3  file could not be read or written
  4  numerical failure (CFL violation, non-finite state, non-positive mass, domain error)
  5  compared files have different columns or row counts

Environment:
  NCHARGE_OUTPUT_ROOT  directory that receives run outputs (default: ./ncharge-output)";

#[derive(Parser)]
#[command(name = "ncharge", version, about = "Scenario runner for the non-conserved charge field model", after_help = EXIT_CODES)]
struct Cli {
    /// Worker threads for parallel solver stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write its artifacts under the output root.
    Run { config: PathBuf },
    /// Compare two CSV artifacts column by column.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Largest allowed absolute difference in any numeric column.
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
    },
    /// Run every acceptance check and print a summary table.
    VerifyAll,
}

fn print_outcome(out: &RunOutcome) {
    for line in &out.summary {
        println!("{line}");
    }
    println!("wrote {} files to {}", out.manifest.files.len() + 1, out.dir.display());
}

fn run_config(path: &Path) -> Result<bool, Error> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::config("<root>", format!("config is not UTF-8: {e}")))?;
    let cfg = parse_config(text)?;
    let sub = match &cfg.output {
        Some(o) => PathBuf::from(o),
        None => PathBuf::from(path.file_stem().unwrap_or(cfg.kind.name().as_ref())),
    };
    let out = scenario::run(&cfg, &bytes, &scenario::output_root().join(sub))?;
    print_outcome(&out);
    Ok(out.pass)
}

fn run_compare(a: &Path, b: &Path, tol: f64) -> Result<bool, Error> {
    if !(tol >= 0.0) {
        return Err(Error::config("--tol", "must be a non-negative number"));
    }
    let r = compare::compare_files(a, b, tol)?;
    println!("{:<20} {:>24} {:>24} {:>10}", "column", "max |delta|", "rms delta", "status");
    for c in &r.columns {
        let ok = c.max_abs <= tol && c.text_mismatches == 0;
        let status = if ok { "ok" } else { "EXCEEDS" };
        if c.numeric {
            println!("{:<20} {:>24.16e} {:>24.16e} {:>10}", c.column, c.max_abs, c.l2, status);
        } else {
            println!("{:<20} {:>24} {:>24} {:>10}", c.column, format!("{} differ", c.text_mismatches), "text", status);
        }
    }
    println!("{} rows, tolerance {:e}: {}", r.rows, tol, if r.pass { "PASS" } else { "FAIL" });
    Ok(r.pass)
}

fn run_verify_all() -> Result<bool, Error> {
    let checks = verify::verify_all()?;
    let dir = scenario::output_root().join("verify-all");
    let mut set = scenario::artifact::ArtifactSet::create(&dir)?;
    let (lines, pass) = scenario::write_checks(&checks, &mut set)?;
    set.finish("verify-all", b"")?;
    for line in lines {
        println!("{line}");
    }
    println!("{}: {} of {} checks passed", if pass { "PASS" } else { "FAIL" }, checks.iter().filter(|c| c.pass()).count(), checks.len());
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Run { config } => run_config(config),
        Command::Compare { a, b, tol } => run_compare(a, b, *tol),
        Command::VerifyAll => run_verify_all(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
