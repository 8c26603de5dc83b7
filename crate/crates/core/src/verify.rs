//! Built-in verification suite: one check per acceptance criterion, each comparing a solver or
//! identity against an analytic oracle with a pinned tolerance.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::conservation::{
    divergence_identity_residual, energy_law_terms, momentum_law_terms, subsystem_energy_terms,
    subsystem_momentum_terms,
};
use crate::error::Result;
use crate::field::{manufactured_sources, FieldPoint, SourcePoint, Units};
use crate::gamma::{dirac_residual, system_lhs_4d};
use crate::mms::{random_event, Quadratic16};
use crate::particle::{
    push, push_tracked, run_orbit, OrbitRun, OrbitSource, ParticleState, TrackedParticle, UniformField,
};
use crate::shell::{self, ChargeMode, ShellSpec};
use crate::solver::cartesian::{run_dispersion, run_plane_wave, DispersionRun, PlaneWaveRun};
use crate::solver::radial::{probe_error, run_shell, RadialScheme, ShellRun};
use crate::vec3::Vec3;
use crate::wigner::{run_cycle, CycleConfig};

/// Relative agreement required between thread counts.
pub const DETERMINISM_TOL: f64 = 1e-13;
/// Thread counts compared by the determinism check.
pub const THREAD_COUNTS: [usize; 3] = [1, 2, 8];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metric {
    pub name: &'static str,
    pub value: f64,
    /// Bound the value is checked against, if any.
    pub limit: Option<f64>,
    /// `true` when the value must be at least the limit rather than at most.
    pub lower_bound: bool,
}

impl Metric {
    fn max(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, value, limit: Some(limit), lower_bound: false }
    }

    fn min(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, value, limit: Some(limit), lower_bound: true }
    }

    fn info(name: &'static str, value: f64) -> Self {
        Self { name, value, limit: None, lower_bound: false }
    }

    pub fn pass(&self) -> bool {
        match self.limit {
            None => true,
            Some(l) if self.lower_bound => self.value >= l,
            Some(l) => self.value <= l,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub criterion: u8,
    pub name: &'static str,
    pub metrics: Vec<Metric>,
    /// Wall-clock limit, if the criterion has one.
    pub runtime_limit: Option<f64>,
    #[serde(skip)]
    pub seconds: f64,
}

impl CheckResult {
    pub fn pass(&self) -> bool {
        self.metrics.iter().all(Metric::pass) && self.runtime_limit.is_none_or(|l| self.seconds <= l)
    }

    /// The metric that decides the check; the first listed.
    pub fn headline(&self) -> &Metric {
        &self.metrics[0]
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn timed(
    criterion: u8,
    name: &'static str,
    runtime_limit: Option<f64>,
    f: impl FnOnce() -> Result<Vec<Metric>>,
) -> Result<CheckResult> {
    let start = Instant::now();
    let metrics = f()?;
    Ok(CheckResult { criterion, name, metrics, runtime_limit, seconds: start.elapsed().as_secs_f64() })
}

pub fn algebra() -> Result<CheckResult> {
    timed(1, "hypercomplex residual equals component equations", Some(5.0), || {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut worst = 0.0f64;
        for kappa in [0.0, 0.5, 2.0] {
            for _ in 0..100 {
                let jet = Quadratic16::<f64>::random(&mut rng, 1.0).field_jet(&random_event(&mut rng, 1.0));
                let a = dirac_residual(&jet, kappa);
                let b = system_lhs_4d(&jet, kappa);
                let scale = 1.0 + jet.max_abs();
                worst = (0..16).fold(worst, |w, s| w.max((a[s] - b[s]).abs() / scale));
            }
        }
        Ok(vec![Metric::max("max_relative_difference", worst, 1e-12)])
    })
}

pub fn plane_wave() -> Result<CheckResult> {
    timed(2, "longitudinal plane wave travels at c", Some(30.0), || {
        let u = Units::<f64>::natural();
        let cfg = PlaneWaveRun { eps0: 1.0, wavelength: 1.0, n: 4096, cfl: 1.0, crossings: 10, samples_per_crossing: 16 };
        let out = run_plane_wave(&cfg, &u)?;
        Ok(vec![
            Metric::max("phase_speed_error", (out.phase_speed / u.c - 1.0).abs(), 1e-3),
            Metric::max("b_over_e", out.b_ratio, 1e-10),
            Metric::info("shape_error", out.shape_error),
        ])
    })
}

pub fn massive_dispersion() -> Result<CheckResult> {
    timed(3, "massive dispersion relation", Some(60.0), || {
        let u = Units::natural().with_kappa(2.0);
        let cfg = DispersionRun {
            length: 2.0 * std::f64::consts::PI,
            n: 256,
            cfl: 0.8,
            modes: vec![1, 2, 3, 4, 5],
            periods: 20.0,
        };
        let out = run_dispersion(&cfg, &u)?;
        let worst = out.points.iter().fold(0.0f64, |w, p| w.max(p.rel_error));
        Ok(vec![
            Metric::max("max_omega_squared_error", worst, 1e-2),
            Metric::info("wavenumbers", out.points.len() as f64),
        ])
    })
}

/// Growing shell with `q₀ = r₀ = τ = 1`, probe at 3 and ledger sphere at 9.
fn shell_cfg(n: usize, t_end: f64) -> ShellRun<f64> {
    ShellRun {
        q0: 1.0,
        r0: 1.0,
        tau: 1.0,
        mode: ChargeMode::Growth,
        r_max: 17.0,
        n,
        cfl: 1.0,
        scheme: RadialScheme::Characteristic,
        t_end,
        probe_r: 3.0,
        ledger_r: 9.0,
        sample_every: 1,
    }
}

pub fn shell_transient() -> Result<CheckResult> {
    timed(4, "shell transient against closed forms", Some(60.0), || {
        let u = Units::natural();
        let mut errs = Vec::new();
        for n in [1024, 2048, 4096] {
            let cfg = shell_cfg(n, 12.0);
            errs.push(probe_error(&run_shell(&cfg, &u)?, &cfg, &u)?);
        }
        let order = (errs[0] / errs[1]).log2().min((errs[1] / errs[2]).log2());
        Ok(vec![
            Metric::max("l2_error_n4096", errs[2], 1e-2),
            Metric::min("observed_order", order, 1.8),
            Metric::info("l2_error_n1024", errs[0]),
            Metric::info("l2_error_n2048", errs[1]),
        ])
    })
}

pub fn radiated_energy() -> Result<CheckResult> {
    timed(5, "radiated energy through R", None, || {
        let u = Units::natural();
        let cfg = shell_cfg(2048, 40.0);
        let out = run_shell(&cfg, &u)?;
        let spec = ShellSpec::new(cfg.q0, cfg.r0, cfg.tau, cfg.mode)?;
        let exact = shell::radiated_energy(cfg.ledger_r, &spec, &u)?;

        // A small shell: the escaping part must approach ζcq₀²/(8πcτ).
        let small = ShellRun { r0: 0.01, r_max: 12.01, n: 4800, ledger_r: 9.01, sample_every: 100, ..cfg };
        let out_small = run_shell(&small, &u)?;
        let eight_pi = 8.0 * std::f64::consts::PI;
        let tail = u.zeta * u.c * small.q0 * small.q0 / (eight_pi * small.ledger_r);
        let limit = u.zeta * u.c * small.q0 * small.q0 / (eight_pi * u.c * small.tau);
        Ok(vec![
            Metric::max("flux_integral_error", rel(out.radiated, exact), 0.02),
            Metric::max("small_shell_limit_error", rel(out_small.radiated - tail, limit), 0.02),
        ])
    })
}

pub fn energy_ledgers() -> Result<CheckResult> {
    timed(6, "energy ledgers", None, || {
        let u = Units { c: 1.3, zeta: 0.8, kappa: 0.0 };
        let mut worst = 0.0f64;
        let decades = [1e-1, 1e0, 1e1, 1e2];
        for &q0 in &decades {
            for &r0 in &decades {
                for &tau in &decades {
                    for mode in [ChargeMode::Growth, ChargeMode::Decay] {
                        let spec = ShellSpec::new(q0, r0, tau, mode)?;
                        for big_r in [r0, 10.0 * r0, 1000.0 * r0, f64::INFINITY] {
                            worst = worst.max(shell::balance_ledger(&spec, big_r, &u)?.relative_residual());
                        }
                    }
                }
            }
        }
        let n = Units::natural();
        let cfg = shell_cfg(2048, 40.0);
        let sim = run_shell(&cfg, &n)?.ledger(cfg.mode);
        let exact = shell::balance_ledger(&ShellSpec::new(cfg.q0, cfg.r0, cfg.tau, cfg.mode)?, cfg.ledger_r, &n)?;
        Ok(vec![
            Metric::max("closed_form_residual", worst, 1e-12),
            Metric::max("rest_energy_error", rel(sim.delta_rest_energy, exact.delta_rest_energy), 0.02),
            Metric::max("field_plus_radiation_error", rel(sim.w_coul + sim.w_rad, exact.w_coul + exact.w_rad), 0.02),
        ])
    })
}

pub fn mass_shell() -> Result<CheckResult> {
    timed(7, "mass shell and electromagnetic mass invariance", None, || {
        let u = Units::<f64> { c: 1.5, zeta: 1.0, kappa: 0.0 };
        let v3 = Vec3::new;
        let field = FieldPoint { eps: 0.05, e: v3(0.1, -0.2, 0.05), cb: v3(0.3, 0.1, -0.4), ..FieldPoint::zero() };
        let start = ParticleState { q: 1.0, m: 2.0, x: Vec3::zero(), p: v3(0.5, 0.0, 0.2), t: 0.0 };
        let mut tracked = TrackedParticle::new(start, &u);
        let mut worst = 0.0f64;
        for _ in 0..10_000 {
            tracked = push_tracked(&tracked, &UniformField(field), 1e-3, &u)?;
            worst = worst.max(tracked.mass_shell_residual(&u).abs());
        }
        let em = UniformField(FieldPoint { eps: 0.0, ..field });
        let mut s = start;
        for _ in 0..10_000 {
            s = push(&s, &em, 1e-3, &u)?;
        }
        Ok(vec![
            Metric::max("mass_shell_residual", worst, 1e-10),
            Metric::max("mass_change_without_eps", (s.m - start.m).abs() / start.m, 1e-12),
            Metric::info("mass_change_with_eps", (tracked.state.m - start.m).abs() / start.m),
        ])
    })
}

pub fn interaction_invariant() -> Result<CheckResult> {
    timed(8, "two-charge interaction invariant", None, || {
        let u = Units::natural();
        let drift = |dt: f64| -> Result<f64> {
            let cfg = OrbitRun { dt, steps: (40.0 / dt).round() as usize, sample_every: 100_000, ..OrbitRun::default() };
            Ok(run_orbit::<f64>(&cfg, &u)?.max_drift)
        };
        let d = [drift(0.2)?, drift(0.1)?, drift(0.05)?];
        let order = (d[0] / d[1]).log2().min((d[1] / d[2]).log2());
        let growth = OrbitRun {
            q: 0.5,
            m: 1.0,
            q1: 2.0,
            x0: [2.0, 0.0, 0.0],
            p0: [0.0, 0.3, 0.1],
            dt: 2e-3,
            steps: 5000,
            source: OrbitSource::Growth { r0: 0.5, tau: 1.0 },
            sample_every: 5000,
        };
        Ok(vec![
            // RK4 energy error on a conservative orbit can converge faster than dt⁴.
            Metric::min("drift_order", order, 3.8),
            Metric::max("growing_source_drift", run_orbit::<f64>(&growth, &u)?.max_drift, 1e-6),
            Metric::info("drift_dt_0.2", d[0]),
            Metric::info("drift_dt_0.1", d[1]),
            Metric::info("drift_dt_0.05", d[2]),
        ])
    })
}

pub fn conservation_identities() -> Result<CheckResult> {
    timed(9, "energy and momentum identities", None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (mut worst, mut restriction, mut sources_nonzero) = (0.0f64, 0.0f64, true);
        for _ in 0..200 {
            let u = Units {
                c: rng.random_range(0.5..3.0),
                zeta: rng.random_range(0.5..3.0),
                kappa: rng.random_range(0.0..2.0),
            };
            let jet = Quadratic16::<f64>::random(&mut rng, 1.0).field_jet(&random_event(&mut rng, 1.0));
            let src = manufactured_sources(&jet, &u);
            sources_nonzero &= src.to_array().iter().all(|v| *v != 0.0);
            let (e, m) = divergence_identity_residual(&jet, &src, &u);
            worst = worst.max(e.abs()).max(m.max_abs());

            let mut r = || rng.random_range(-1.0..1.0);
            let (eps, e, cb, rho) = (r(), Vec3::new(r(), r(), r()), Vec3::new(r(), r(), r()), r());
            let j = Vec3::new(r(), r(), r());
            let f = FieldPoint { eps, e, cb, ..FieldPoint::zero() };
            let s = SourcePoint { rho_e: rho, j_e: j, ..SourcePoint::zero() };
            let (fd, fp, ff) = energy_law_terms(&f, &s, &u);
            let (sd, sp, sf) = subsystem_energy_terms(eps, e, cb, rho, j, &u);
            let (fg, fforce, ft) = momentum_law_terms(&f, &s, &u);
            let (sg, sforce, st) = subsystem_momentum_terms(eps, e, cb, rho, j, &u);
            let mut d = (fd - sd).abs().max((fp - sp).abs()).max((ff - sf).max_abs());
            d = d.max((fg - sg).max_abs()).max((fforce - sforce).max_abs());
            for i in 0..3 {
                for k in 0..3 {
                    d = d.max((ft[i][k] - st[i][k]).abs());
                }
            }
            restriction = restriction.max(d);
        }
        Ok(vec![
            Metric::max("identity_residual", worst, 1e-10),
            Metric::max("subsystem_restriction", restriction, 1e-12),
            Metric::min("all_sources_nonzero", if sources_nonzero { 1.0 } else { 0.0 }, 1.0),
        ])
    })
}

pub fn wigner_cycle() -> Result<CheckResult> {
    timed(10, "charge creation cycle ledger", None, || {
        let u = Units::natural();
        let (mut residual, mut deficit) = (0.0f64, 0.0f64);
        let decades = [1e-2, 1e-1, 1e0, 1e1];
        for q0 in [-2.0, 0.5, 3.0] {
            for &r0 in &decades {
                for &tau in &decades {
                    for (phi1, phi2) in [(0.0, 0.0), (1.0, 0.0), (-2.0, 5.0), (0.3, 0.3)] {
                        let cfg = CycleConfig {
                            shell: ShellSpec::new(q0, r0, tau, ChargeMode::Growth)?,
                            phi1,
                            phi2,
                            m0: 1e6,
                            cage_m0: 1e6,
                        };
                        let l = run_cycle(&cfg, &u)?;
                        residual = residual.max(l.relative_residual());
                        let scale = l.stages.iter().fold(0.0f64, |a, e| a.max(e.max_abs()));
                        deficit = deficit.max((l.particle_deficit - (l.w_rad_1 + l.w_rad_2)).abs() / scale);
                    }
                }
            }
        }
        Ok(vec![
            Metric::max("ledger_residual", residual, 1e-12),
            Metric::max("particle_deficit_mismatch", deficit, 1e-12),
        ])
    })
}

/// Criteria 1 to 10, in order.
pub fn run_checks() -> Result<Vec<CheckResult>> {
    Ok(vec![
        algebra()?,
        plane_wave()?,
        massive_dispersion()?,
        shell_transient()?,
        radiated_energy()?,
        energy_ledgers()?,
        mass_shell()?,
        interaction_invariant()?,
        conservation_identities()?,
        wigner_cycle()?,
    ])
}

/// Largest relative difference between the metrics of two runs of the suite.
pub fn max_metric_difference(a: &[CheckResult], b: &[CheckResult]) -> f64 {
    let mut worst = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        for (m, n) in x.metrics.iter().zip(&y.metrics) {
            let d = (m.value - n.value).abs();
            let scale = m.value.abs().max(n.value.abs());
            worst = worst.max(if scale > 0.0 { d / scale } else { d });
        }
    }
    if a.len() != b.len() {
        worst = f64::INFINITY;
    }
    worst
}

fn in_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Runs criteria 1 to 10 once per thread count in [`THREAD_COUNTS`] and appends criterion 11.
/// The reported results for 1 to 10 are those of the first thread count.
pub fn verify_all() -> Result<Vec<CheckResult>> {
    let mut runs = Vec::new();
    let start = Instant::now();
    for threads in THREAD_COUNTS {
        runs.push(in_pool(threads, run_checks)?);
    }
    let mut metrics = Vec::new();
    let names = ["difference_2_threads", "difference_8_threads"];
    for (name, other) in names.iter().zip(&runs[1..]) {
        metrics.push(Metric::max(name, max_metric_difference(&runs[0], other), DETERMINISM_TOL));
    }
    let mut out = runs.swap_remove(0);
    out.push(CheckResult {
        criterion: 11,
        name: "identical results across thread counts",
        metrics,
        runtime_limit: None,
        seconds: start.elapsed().as_secs_f64(),
    });
    Ok(out)
}
