use ncharge::conservation::*;
use ncharge::field::{manufactured_sources, plane_wave, plane_wave_jet, FieldPoint, SourcePoint, Units};
use ncharge::gamma::FieldJet;
use ncharge::mms::{random_event, random_field_point, Quadratic16};
use ncharge::shell::{self, ChargeMode, ShellSpec};
use ncharge::solver::radial::{run_shell, RadialScheme, ShellRun};
use ncharge::{Error, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn v3(x: f64, y: f64, z: f64) -> Vec3<f64> {
    Vec3::new(x, y, z)
}

fn random_jet(rng: &mut ChaCha8Rng) -> FieldJet<f64> {
    FieldJet {
        value: random_field_point(rng, 1.0),
        dt: random_field_point(rng, 1.0),
        grad: std::array::from_fn(|_| random_field_point(rng, 1.0)),
    }
}

fn random_source(rng: &mut ChaCha8Rng) -> SourcePoint<f64> {
    SourcePoint::from_array(std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
}

fn random_units(rng: &mut ChaCha8Rng) -> Units<f64> {
    Units { c: rng.random_range(0.5..3.0), zeta: rng.random_range(0.5..3.0), kappa: rng.random_range(0.0..2.0) }
}

#[test]
fn zero_fields_give_zero_terms() {
    let u = Units::<f64>::natural();
    let s = sample(&FieldPoint::zero(), &SourcePoint::zero(), &u);
    assert_eq!(s.energy_density, 0.0);
    assert_eq!(s.interaction_power, 0.0);
    assert_eq!(s.energy_flux, Vec3::zero());
    assert_eq!(s.momentum_density, Vec3::zero());
    assert_eq!(s.interaction_force, Vec3::zero());
    assert!(s.stress.iter().flatten().all(|&x| x == 0.0));
}

#[test]
fn pure_electric_field_examples() {
    let u = Units::<f64>::natural();
    let f = FieldPoint { e: v3(1.0, 0.0, 0.0), ..FieldPoint::zero() };
    let (d, _, _) = energy_law_terms(&f, &SourcePoint::zero(), &u);
    assert_eq!(d, 0.5);
    // Maxwell stress: tension along the field, pressure across it.
    let e1: f64 = 1.7;
    let u = Units { c: 2.0, zeta: 0.5, kappa: 0.0 };
    let f = FieldPoint { e: v3(e1, 0.0, 0.0), ..FieldPoint::zero() };
    let t = momentum_law_terms(&f, &SourcePoint::zero(), &u).2;
    let s = 1.0 / (u.zeta * u.c);
    assert!((t[0][0] - e1 * e1 / 2.0 * s).abs() < 1e-15);
    assert!((t[1][1] + e1 * e1 / 2.0 * s).abs() < 1e-15);
    assert!((t[2][2] + e1 * e1 / 2.0 * s).abs() < 1e-15);
    assert!(t[0][1] == 0.0 && t[1][2] == 0.0 && t[0][2] == 0.0);
}

#[test]
fn antisymmetric_stress_from_eps_and_b() {
    let u = Units { c: 1.5, zeta: 2.0, kappa: 0.0 };
    let f = FieldPoint { eps: 0.8, cb: v3(0.3, -0.5, 1.1), ..FieldPoint::zero() };
    let t = momentum_law_terms(&f, &SourcePoint::zero(), &u).2;
    let s = 1.0 / (u.zeta * u.c);
    let lc = |i: usize, j: usize, k: usize| -> f64 {
        let p = [i, j, k];
        if p[0] == p[1] || p[1] == p[2] || p[0] == p[2] {
            0.0
        } else if (i + 1) % 3 == j {
            1.0
        } else {
            -1.0
        }
    };
    for i in 0..3 {
        for j in 0..3 {
            let anti = (t[i][j] - t[j][i]) / 2.0;
            let expect: f64 = (0..3).map(|k| -lc(i, j, k) * f.eps * f.cb[k] * s).sum();
            assert!((anti - expect).abs() < 1e-15, "{i}{j}");
        }
    }
}

#[test]
fn plane_wave_flux_is_eps_e_over_zeta() {
    let u = Units { c: 2.0, zeta: 3.0, kappa: 0.0 };
    let khat = v3(0.6, 0.0, 0.8);
    let f = plane_wave(0.9, 1.3, khat, 0.2, v3(0.1, 0.4, -0.3), &u).unwrap();
    let (_, _, flux) = energy_law_terms(&f, &SourcePoint::zero(), &u);
    let expect = f.e * (f.eps / u.zeta);
    assert!((flux - expect).max_abs() < 1e-15);
    assert!(flux.cross(&khat).max_abs() < 1e-15);
}

#[test]
fn identities_vanish_on_plane_waves() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let u = Units { kappa: 0.0, ..random_units(&mut rng) };
        let mut k = v3(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        k = k * (1.0 / k.norm());
        let jet = plane_wave_jet(1.0, rng.random_range(0.5..3.0), k, rng.random_range(0.0..2.0), v3(0.3, -0.2, 0.9), &u)
            .unwrap();
        let (e, m) = divergence_identity_residual(&jet, &SourcePoint::zero(), &u);
        assert!(e.abs() < 1e-12 && m.max_abs() < 1e-12, "{e} {m:?}");
    }
}

#[test]
fn residuals_equal_the_field_equation_contraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..500 {
        let u = random_units(&mut rng);
        let jet = random_jet(&mut rng);
        let src = random_source(&mut rng);
        let (e, m) = divergence_identity_residual(&jet, &src, &u);
        let (ce, cm) = residual_contraction(&jet, &src, &u);
        assert!((e - ce).abs() < 1e-12 * (1.0 + ce.abs()), "{e} vs {ce}");
        assert!((m - cm).max_abs() < 1e-12 * (1.0 + cm.max_abs()), "{m:?} vs {cm:?}");
    }
}

#[test]
fn identities_hold_on_manufactured_solutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let u = random_units(&mut rng);
        let q = Quadratic16::<f64>::random(&mut rng, 1.0);
        let x = random_event(&mut rng, 1.0);
        let jet = q.field_jet(&x);
        let src = manufactured_sources(&jet, &u);
        assert!(src.to_array().iter().all(|v| v.abs() > 0.0));
        let (e, m) = divergence_identity_residual(&jet, &src, &u);
        assert!(e.abs() < 1e-10 && m.max_abs() < 1e-10, "{e} {m:?}");
    }
}

#[test]
fn subsystem_laws_are_the_restriction() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let u = random_units(&mut rng);
        let mut r = || rng.random_range(-1.0..1.0);
        let (eps, e, cb, rho, j) = (r(), v3(r(), r(), r()), v3(r(), r(), r()), r(), v3(r(), r(), r()));
        let f = FieldPoint { eps, e, cb, ..FieldPoint::zero() };
        let src = SourcePoint { rho_e: rho, j_e: j, ..SourcePoint::zero() };
        let full_e = energy_law_terms(&f, &src, &u);
        let sub_e = subsystem_energy_terms(eps, e, cb, rho, j, &u);
        assert!((full_e.0 - sub_e.0).abs() < 1e-14);
        assert!((full_e.1 - sub_e.1).abs() < 1e-14);
        assert!((full_e.2 - sub_e.2).max_abs() < 1e-14);
        let full_m = momentum_law_terms(&f, &src, &u);
        let sub_m = subsystem_momentum_terms(eps, e, cb, rho, j, &u);
        assert!((full_m.0 - sub_m.0).max_abs() < 1e-14);
        assert!((full_m.1 - sub_m.1).max_abs() < 1e-14);
        for i in 0..3 {
            for k in 0..3 {
                assert!((full_m.2[i][k] - sub_m.2[i][k]).abs() < 1e-14);
            }
        }
    }
}

fn shell_run(n: usize, mode: ChargeMode) -> ShellRun<f64> {
    ShellRun {
        q0: 1.0,
        r0: 1.0,
        tau: 1.0,
        mode,
        r_max: 17.0,
        n,
        cfl: 1.0,
        scheme: RadialScheme::Characteristic,
        t_end: 12.0,
        probe_r: 3.0,
        ledger_r: 9.0,
        sample_every: 1,
    }
}

#[test]
fn static_coulomb_balance_is_exact() {
    let u = Units::<f64>::natural();
    let mut cfg = shell_run(256, ChargeMode::Decay);
    // A decaying shell with an enormous time constant holds its Coulomb field.
    cfg.tau = 1e300;
    let out = run_shell(&cfg, &u).unwrap();
    let samples: Vec<EnergySample<f64>> = out.samples.iter().map(EnergySample::from).collect();
    let rep = discrete_balance(&samples).unwrap();
    let scale = samples[0].field_energy;
    assert!(rep.max_abs < 1e-12 * scale, "{}", rep.max_abs);
}

#[test]
fn growth_balance_converges_at_second_order() {
    let u = Units::<f64>::natural();
    let reps: Vec<BalanceReport<f64>> = [512, 1024, 2048]
        .iter()
        .map(|&n| {
            let out = run_shell(&shell_run(n, ChargeMode::Growth), &u).unwrap();
            let s: Vec<EnergySample<f64>> = out.samples.iter().map(EnergySample::from).collect();
            discrete_balance(&s).unwrap()
        })
        .collect();
    for w in reps.windows(2) {
        let ratio = w[0].rms / w[1].rms;
        assert!(ratio > 3.5, "rms ratio {ratio}: {} then {}", w[0].rms, w[1].rms);
    }
}

#[test]
fn growth_ledger_reproduces_the_attribution() {
    let u = Units::<f64>::natural();
    let mut cfg = shell_run(2048, ChargeMode::Growth);
    cfg.t_end = 40.0;
    let out = run_shell(&cfg, &u).unwrap();
    let s: Vec<EnergySample<f64>> = out.samples.iter().map(EnergySample::from).collect();
    let rep = discrete_balance(&s).unwrap();
    let spec = ShellSpec::new(1.0, 1.0, 1.0, ChargeMode::Growth).unwrap();
    let exact = shell::balance_ledger(&spec, 9.0, &u).unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    assert!(rel(rep.source_work, exact.delta_rest_energy) < 0.02);
    assert!(rel(rep.energy_change + rep.outflow_work, exact.w_coul + exact.w_rad) < 0.02);
    assert!(rep.ledger_residual.abs() < 1e-3 * rep.source_work);
}

#[test]
fn balance_rejects_bad_series() {
    let s = |t: f64| EnergySample { t, field_energy: 0.0, source_power: 0.0, inflow: 0.0, outflow: 0.0 };
    assert!(matches!(discrete_balance(&[s(0.0)]), Err(Error::GridMismatch(_))));
    assert!(matches!(discrete_balance(&[s(0.0), s(0.1), s(0.3)]), Err(Error::GridMismatch(_))));
    assert!(matches!(discrete_balance(&[s(0.1), s(0.0)]), Err(Error::GridMismatch(_))));
}

#[test]
fn single_precision_terms() {
    let u = Units::<f32>::natural();
    let f = FieldPoint::<f32> { eps: 1.0, e: Vec3::new(1.0, 0.0, 0.0), ..FieldPoint::zero() };
    let (d, _, fl) = energy_law_terms(&f, &SourcePoint::zero(), &u);
    assert_eq!(d, 1.0);
    assert_eq!(fl, Vec3::new(1.0, 0.0, 0.0));
}
