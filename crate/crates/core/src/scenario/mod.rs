//! Scenario configs and runs: a JSON config selects one of the solvers, oracles, the particle
//! pusher, the cycle ledger or the verification suite, and the run writes deterministic CSV and
//! JSON artifacts plus a manifest into an output directory.

pub mod artifact;
pub mod compare;

use std::path::{Component, Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::conservation::{discrete_balance, EnergySample};
use crate::error::{Error, Result};
use crate::field::Units;
use crate::particle::{run_orbit, OrbitRun};
use crate::shell::{self, ChargeMode, ShellSpec};
use crate::solver::cartesian::{run_dispersion, run_plane_wave, DispersionRun, PlaneWaveRun};
use crate::solver::radial::{probe_error, run_shell, RadialScheme, ShellRun, ShellSample};
use crate::verify::{self, CheckResult};
use crate::wigner::{run_cycle, CycleConfig};
use artifact::{ArtifactSet, Cell, Manifest, Table};

/// Environment variable naming the directory under which run outputs are written.
pub const OUTPUT_ROOT_VAR: &str = "NCHARGE_OUTPUT_ROOT";
/// Output root used when [`OUTPUT_ROOT_VAR`] is unset.
pub const DEFAULT_OUTPUT_ROOT: &str = "ncharge-output";
/// Relative tolerance for the simulated energy attribution of shell runs.
pub const ATTRIBUTION_TOL: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    ShellGrowth,
    ShellDecay,
    PlaneWave,
    MassiveDispersion,
    TwoChargeOrbit,
    WignerCycle,
    VerifyAll,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::ShellGrowth => "shell-growth",
            Kind::ShellDecay => "shell-decay",
            Kind::PlaneWave => "plane-wave",
            Kind::MassiveDispersion => "massive-dispersion",
            Kind::TwoChargeOrbit => "two-charge-orbit",
            Kind::WignerCycle => "wigner-cycle",
            Kind::VerifyAll => "verify-all",
        }
    }
}

/// Shell transient parameters; the charge law follows from the scenario kind.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShellParams {
    pub q0: f64,
    pub r0: f64,
    pub tau: f64,
    pub r_max: f64,
    pub n: usize,
    pub cfl: f64,
    pub scheme: RadialScheme,
    pub t_end: f64,
    pub probe_r: f64,
    /// Radius of the ledger sphere; must be a grid node.
    pub ledger_r: f64,
    pub sample_every: usize,
}

impl Default for ShellParams {
    fn default() -> Self {
        Self {
            q0: 1.0,
            r0: 1.0,
            tau: 1.0,
            r_max: 17.0,
            n: 2048,
            cfl: 1.0,
            scheme: RadialScheme::Characteristic,
            t_end: 40.0,
            probe_r: 3.0,
            ledger_r: 9.0,
            sample_every: 1,
        }
    }
}

impl ShellParams {
    pub fn to_run(&self, mode: ChargeMode) -> ShellRun<f64> {
        ShellRun {
            q0: self.q0,
            r0: self.r0,
            tau: self.tau,
            mode,
            r_max: self.r_max,
            n: self.n,
            cfl: self.cfl,
            scheme: self.scheme,
            t_end: self.t_end,
            probe_r: self.probe_r,
            ledger_r: self.ledger_r,
            sample_every: self.sample_every,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WignerParams {
    pub q0: f64,
    pub r0: f64,
    pub tau: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub m0: f64,
    pub cage_m0: f64,
}

impl Default for WignerParams {
    fn default() -> Self {
        Self { q0: 1.0, r0: 1.0, tau: 1.0, phi1: 1.0, phi2: 0.0, m0: 10.0, cage_m0: 10.0 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyParams {}

#[derive(Clone, Debug, PartialEq)]
pub enum Params {
    Shell(ShellParams),
    PlaneWave(PlaneWaveRun<f64>),
    MassiveDispersion(DispersionRun<f64>),
    TwoChargeOrbit(OrbitRun),
    WignerCycle(WignerParams),
    VerifyAll(VerifyParams),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub kind: Kind,
    pub units: Units<f64>,
    /// Output subdirectory under the output root.
    pub output: Option<String>,
    pub params: Params,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: Kind,
    #[serde(default)]
    units: Value,
    #[serde(default)]
    output: Option<String>,
    #[serde(default)]
    params: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitUnits {
    c: f64,
    zeta: f64,
    #[serde(default)]
    kappa: f64,
}

/// Speed of light in m/s.
pub const SI_C: f64 = 299_792_458.0;
/// Impedance of free space in ohms.
pub const SI_ZETA: f64 = 376.730_313_668;

fn join_key(prefix: &str, rest: &str) -> String {
    match (prefix.is_empty(), rest.is_empty()) {
        (true, _) => rest.to_owned(),
        (_, true) => prefix.to_owned(),
        _ => format!("{prefix}.{rest}"),
    }
}

/// Field name quoted in a serde message such as "unknown field `x`".
fn quoted_field(msg: &str) -> Option<&str> {
    ["unknown field `", "missing field `"]
        .iter()
        .find_map(|p| msg.strip_prefix(p))
        .and_then(|rest| rest.split('`').next())
}

fn decode_error<E: std::fmt::Display>(prefix: &str, err: serde_path_to_error::Error<E>) -> Error {
    let path = err.path().to_string();
    let msg = err.inner().to_string();
    let mut key = join_key(prefix, if path == "." { "" } else { &path });
    if let Some(f) = quoted_field(&msg) {
        if !key.ends_with(f) {
            key = join_key(&key, f);
        }
    }
    if key.is_empty() {
        key = "<root>".to_owned();
    }
    Error::config(key, msg)
}

fn decode_value<T: DeserializeOwned>(prefix: &str, v: Value) -> Result<T> {
    let v = if v.is_null() { Value::Object(Default::default()) } else { v };
    serde_path_to_error::deserialize(v).map_err(|e| decode_error(prefix, e))
}

fn parse_units(v: Value) -> Result<Units<f64>> {
    match v {
        Value::Null => Ok(Units::natural()),
        Value::String(s) => match s.as_str() {
            "natural" => Ok(Units::natural()),
            "si" => Units::new(SI_C, SI_ZETA, 0.0),
            other => Err(Error::config("units", format!("unknown preset `{other}`, expected `natural` or `si`"))),
        },
        v @ Value::Object(_) => {
            let e: ExplicitUnits = decode_value("units", v)?;
            Units::new(e.c, e.zeta, e.kappa)
        }
        _ => Err(Error::config("units", "expected `natural`, `si` or an object with c, zeta, kappa")),
    }
}

/// Parses and validates a scenario config. Errors name the offending key.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| decode_error("", e))?;
    de.end().map_err(|e| Error::config("<root>", e.to_string()))?;
    let units = parse_units(raw.units)?;
    let params = match raw.kind {
        Kind::ShellGrowth | Kind::ShellDecay => Params::Shell(decode_value("params", raw.params)?),
        Kind::PlaneWave => Params::PlaneWave(decode_value("params", raw.params)?),
        Kind::MassiveDispersion => Params::MassiveDispersion(decode_value("params", raw.params)?),
        Kind::TwoChargeOrbit => Params::TwoChargeOrbit(decode_value("params", raw.params)?),
        Kind::WignerCycle => Params::WignerCycle(decode_value("params", raw.params)?),
        Kind::VerifyAll => Params::VerifyAll(decode_value("params", raw.params)?),
    };
    if let Some(out) = &raw.output {
        let p = Path::new(out);
        let plain = p.components().all(|c| matches!(c, Component::Normal(_)));
        if out.is_empty() || !plain {
            return Err(Error::config("output", "must be a relative path without `..`"));
        }
    }
    Ok(ScenarioConfig { kind: raw.kind, units, output: raw.output, params })
}

/// Output root from [`OUTPUT_ROOT_VAR`], or [`DEFAULT_OUTPUT_ROOT`].
pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT))
}

#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: Manifest,
    /// Human-readable summary lines.
    pub summary: Vec<String>,
    /// `false` when a built-in check failed.
    pub pass: bool,
}

/// Runs `cfg` and writes its artifacts into `dir`. `config_bytes` is digested into the manifest.
pub fn run(cfg: &ScenarioConfig, config_bytes: &[u8], dir: &Path) -> Result<RunOutcome> {
    let mut set = ArtifactSet::create(dir)?;
    let (summary, pass) = run_kind(cfg, &mut set).map_err(|e| match e {
        // Library keys name the struct field; report them under the config's params block.
        Error::Config { key, message } => {
            let field = key.rsplit('.').next().unwrap_or(&key);
            Error::config(join_key("params", field), message)
        }
        other => other,
    })?;
    let dir = set.dir().to_path_buf();
    let manifest = set.finish(cfg.kind.name(), config_bytes)?;
    Ok(RunOutcome { dir, manifest, summary, pass })
}

fn run_kind(cfg: &ScenarioConfig, set: &mut ArtifactSet) -> Result<(Vec<String>, bool)> {
    Ok(match &cfg.params {
        Params::Shell(p) => {
            let mode = if cfg.kind == Kind::ShellDecay { ChargeMode::Decay } else { ChargeMode::Growth };
            shell_run(p, mode, &cfg.units, set)?
        }
        Params::PlaneWave(p) => plane_wave_run(p, &cfg.units, set)?,
        Params::MassiveDispersion(p) => dispersion_run(p, &cfg.units, set)?,
        Params::TwoChargeOrbit(p) => orbit_run(p, &cfg.units, set)?,
        Params::WignerCycle(p) => wigner_run(p, &cfg.units, set)?,
        Params::VerifyAll(_) => {
            let checks = verify::verify_all()?;
            write_checks(&checks, set)?
        }
    })
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

#[derive(Serialize)]
struct ShellLedgerDoc {
    mode: ChargeMode,
    ledger_radius: f64,
    simulated: shell::EnergyLedger<f64>,
    closed_form: shell::EnergyLedger<f64>,
    rest_energy_rel_error: f64,
    field_plus_radiation_rel_error: f64,
    attribution_tolerance: f64,
    attribution_within_tolerance: bool,
    probe_l2_error: f64,
    balance_max_abs: f64,
    balance_rms: f64,
    balance_ledger_residual: f64,
}

/// Samples with uniform spacing; a shorter last interval is dropped.
fn uniform_samples(s: &[ShellSample<f64>]) -> &[ShellSample<f64>] {
    if s.len() >= 3 {
        let h = s[1].t - s[0].t;
        let last = s[s.len() - 1].t - s[s.len() - 2].t;
        if (last - h).abs() > 1e-9 * h {
            return &s[..s.len() - 1];
        }
    }
    s
}

fn shell_run(p: &ShellParams, mode: ChargeMode, u: &Units<f64>, set: &mut ArtifactSet) -> Result<(Vec<String>, bool)> {
    let cfg = p.to_run(mode);
    let out = run_shell(&cfg, u)?;
    let spec = ShellSpec::new(cfg.q0, cfg.r0, cfg.tau, mode)?;

    let mut probes = Table::new(&["t", "eps", "e_r", "phi"]);
    let mut oracle = Table::new(&["t", "eps", "e_r", "phi"]);
    let mut energy = Table::new(&["t", "field_energy", "shell_power", "inflow", "outflow"]);
    for s in &out.samples {
        probes.push(vec![s.t.into(), s.probe.eps.into(), s.probe.e_r.into(), s.probe.phi.into()]);
        oracle.push(vec![
            s.t.into(),
            shell::epsilon_field(cfg.probe_r, s.t, &spec, u)?.into(),
            shell::radial_e(cfg.probe_r, s.t, &spec, u)?.into(),
            shell::potential(cfg.probe_r, s.t, &spec, u)?.into(),
        ]);
        energy.push(vec![
            s.t.into(),
            s.field_energy.into(),
            s.shell_power.into(),
            s.inner_flux.into(),
            s.outer_flux.into(),
        ]);
    }
    let mut profile = Table::new(&["r", "eps", "e_r", "phi"]);
    let st = &out.final_state;
    for i in 0..out.grid.len() {
        profile.push(vec![out.grid.radius(i).into(), st.eps[i].into(), st.e_r[i].into(), st.phi[i].into()]);
    }

    let samples: Vec<EnergySample<f64>> = uniform_samples(&out.samples).iter().map(EnergySample::from).collect();
    let balance = discrete_balance(&samples)?;
    let simulated = out.ledger(mode);
    let closed_form = shell::balance_ledger(&spec, cfg.ledger_r, u)?;
    let rest_err = rel(simulated.delta_rest_energy, closed_form.delta_rest_energy);
    let field_err = rel(simulated.w_coul + simulated.w_rad, closed_form.w_coul + closed_form.w_rad);
    let ok = rest_err <= ATTRIBUTION_TOL && field_err <= ATTRIBUTION_TOL;
    let doc = ShellLedgerDoc {
        mode,
        ledger_radius: cfg.ledger_r,
        simulated,
        closed_form,
        rest_energy_rel_error: rest_err,
        field_plus_radiation_rel_error: field_err,
        attribution_tolerance: ATTRIBUTION_TOL,
        attribution_within_tolerance: ok,
        probe_l2_error: probe_error(&out, &cfg, u)?,
        balance_max_abs: balance.max_abs,
        balance_rms: balance.rms,
        balance_ledger_residual: balance.ledger_residual,
    };
    set.table("probes.csv", &probes)?;
    set.table("oracle.csv", &oracle)?;
    set.table("energy.csv", &energy)?;
    set.table("profile.csv", &profile)?;
    set.json("ledger.json", &doc)?;
    let summary = vec![
        format!("rest energy       simulated {:.6e}  closed form {:.6e}", simulated.delta_rest_energy, closed_form.delta_rest_energy),
        format!(
            "W_Coul + W_rad    simulated {:.6e}  closed form {:.6e}",
            simulated.w_coul + simulated.w_rad,
            closed_form.w_coul + closed_form.w_rad
        ),
        format!("probe L2 error    {:.3e}", doc.probe_l2_error),
        format!("attribution       {}", if ok { "within 2%" } else { "outside 2%" }),
    ];
    Ok((summary, true))
}

#[derive(Serialize)]
struct PlaneWaveDoc {
    phase_speed: f64,
    phase_speed_rel_error: f64,
    shape_error: f64,
    b_ratio: f64,
}

fn plane_wave_run(p: &PlaneWaveRun<f64>, u: &Units<f64>, set: &mut ArtifactSet) -> Result<(Vec<String>, bool)> {
    let out = run_plane_wave(p, u)?;
    let mut probe = Table::new(&["t", "phase", "eps", "e_x", "eps_exact"]);
    for s in &out.samples {
        probe.push(vec![s.t.into(), s.phase.into(), s.eps_probe.into(), s.e_probe.into(), s.eps_exact.into()]);
    }
    let mut profile = Table::new(&["x", "eps", "e_x"]);
    for (i, c) in out.final_state.cells.iter().enumerate() {
        profile.push(vec![out.grid.x(i).into(), c[0].into(), c[2].into()]);
    }
    let doc = PlaneWaveDoc {
        phase_speed: out.phase_speed,
        phase_speed_rel_error: rel(out.phase_speed, u.c),
        shape_error: out.shape_error,
        b_ratio: out.b_ratio,
    };
    set.table("probe.csv", &probe)?;
    set.table("profile.csv", &profile)?;
    set.json("summary.json", &doc)?;
    let summary = vec![
        format!("phase speed       {:.12e} (relative error {:.3e})", doc.phase_speed, doc.phase_speed_rel_error),
        format!("shape error       {:.3e}", doc.shape_error),
        format!("max|cB| / max|E|  {:.3e}", doc.b_ratio),
    ];
    Ok((summary, true))
}

fn dispersion_run(p: &DispersionRun<f64>, u: &Units<f64>, set: &mut ArtifactSet) -> Result<(Vec<String>, bool)> {
    let out = run_dispersion(p, u)?;
    let mut t = Table::new(&["k", "omega_measured", "omega_expected", "rel_error"]);
    let mut summary = Vec::new();
    for q in &out.points {
        t.push(vec![q.k.into(), q.omega_measured.into(), q.omega_expected.into(), q.rel_error.into()]);
        summary.push(format!(
            "k = {:.6e}  omega = {:.9e}  expected {:.9e}  omega^2 error {:.3e}",
            q.k, q.omega_measured, q.omega_expected, q.rel_error
        ));
    }
    set.table("dispersion.csv", &t)?;
    let worst = out.points.iter().fold(0.0f64, |w, q| w.max(q.rel_error));
    set.json("summary.json", &serde_json::json!({ "max_rel_error": worst, "points": out.points }))?;
    Ok((summary, true))
}

fn orbit_run(p: &OrbitRun, u: &Units<f64>, set: &mut ArtifactSet) -> Result<(Vec<String>, bool)> {
    let out = run_orbit::<f64>(p, u)?;
    let mut t = Table::new(&["t", "x", "y", "z", "px", "py", "pz", "m", "energy", "invariant", "mass_shell"]);
    for r in &out.rows {
        t.push(vec![
            r.t.into(),
            r.x[0].into(),
            r.x[1].into(),
            r.x[2].into(),
            r.p[0].into(),
            r.p[1].into(),
            r.p[2].into(),
            r.m.into(),
            r.energy.into(),
            r.invariant.into(),
            r.mass_shell.into(),
        ]);
    }
    set.table("trajectory.csv", &t)?;
    set.json("summary.json", &serde_json::json!({ "max_drift": out.max_drift, "max_mass_shell": out.max_mass_shell }))?;
    let summary = vec![
        format!("invariant drift   {:.3e}", out.max_drift),
        format!("mass-shell error  {:.3e}", out.max_mass_shell),
    ];
    Ok((summary, true))
}

fn wigner_run(p: &WignerParams, u: &Units<f64>, set: &mut ArtifactSet) -> Result<(Vec<String>, bool)> {
    let cfg = CycleConfig {
        shell: ShellSpec::new(p.q0, p.r0, p.tau, ChargeMode::Growth)?,
        phi1: p.phi1,
        phi2: p.phi2,
        m0: p.m0,
        cage_m0: p.cage_m0,
    };
    let l = run_cycle(&cfg, u)?;
    let columns = ["stage", "particle_rest", "cage_rest", "coulomb_field", "interaction", "work_extracted", "radiated"];
    let mut t = Table::new(&columns);
    let mut summary = vec![format!(
        "{:<13}{:>16}{:>16}{:>16}{:>16}{:>16}{:>16}",
        columns[0], columns[1], columns[2], columns[3], columns[4], columns[5], columns[6]
    )];
    for e in l.stages.iter().chain([&l.totals]) {
        t.push(vec![
            e.stage.label().into(),
            e.particle_rest.into(),
            e.cage_rest.into(),
            e.coulomb_field.into(),
            e.interaction.into(),
            e.work_extracted.into(),
            e.radiated.into(),
        ]);
        summary.push(format!(
            "{:<13}{:>16.6e}{:>16.6e}{:>16.6e}{:>16.6e}{:>16.6e}{:>16.6e}",
            e.stage.label(),
            e.particle_rest,
            e.cage_rest,
            e.coulomb_field,
            e.interaction,
            e.work_extracted,
            e.radiated
        ));
    }
    summary.push(format!("residual          {:.3e} (relative {:.3e})", l.residual, l.relative_residual()));
    summary.push(format!(
        "particle deficit  {:.9e}  W_rad,1 + W_rad,2 {:.9e}",
        l.particle_deficit,
        l.w_rad_1 + l.w_rad_2
    ));
    set.table("ledger.csv", &t)?;
    set.json("ledger.json", &l)?;
    Ok((summary, true))
}

/// Writes the check table and returns summary lines and the overall verdict.
pub fn write_checks(checks: &[CheckResult], set: &mut ArtifactSet) -> Result<(Vec<String>, bool)> {
    let mut t = Table::new(&["criterion", "metric", "value", "limit", "pass"]);
    for c in checks {
        for m in &c.metrics {
            let limit = m.limit.map_or(Cell::from(""), |l| Cell::Num(l));
            let verdict = if m.limit.is_none() { "info" } else if m.pass() { "pass" } else { "fail" };
            t.push(vec![Cell::Num(c.criterion as f64), m.name.into(), m.value.into(), limit, verdict.into()]);
        }
    }
    set.table("checks.csv", &t)?;
    set.json("checks.json", &checks)?;
    Ok((summary_lines(checks), checks.iter().all(CheckResult::pass)))
}

/// One line per check: criterion, verdict, headline metric and runtime.
pub fn summary_lines(checks: &[CheckResult]) -> Vec<String> {
    checks
        .iter()
        .map(|c| {
            let h = c.headline();
            let bound = match h.limit {
                Some(l) if h.lower_bound => format!(">= {l:.1e}"),
                Some(l) => format!("<= {l:.1e}"),
                None => String::new(),
            };
            format!(
                "{:>2}  {}  {:<50} {} = {:.3e} {}  ({:.2} s)",
                c.criterion,
                if c.pass() { "PASS" } else { "FAIL" },
                c.name,
                h.name,
                h.value,
                bound,
                c.seconds
            )
        })
        .collect()
}
