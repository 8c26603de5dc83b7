use ncharge::field::Units;
use ncharge::shell::{self, ChargeMode, ShellSpec};
use ncharge::wigner::{run_cycle, CycleConfig, CycleLedger, Stage};
use ncharge::Error;
use proptest::prelude::*;

fn cfg(q0: f64, r0: f64, tau: f64, phi1: f64, phi2: f64) -> CycleConfig<f64> {
    CycleConfig {
        shell: ShellSpec::new(q0, r0, tau, ChargeMode::Growth).unwrap(),
        phi1,
        phi2,
        m0: 10.0,
        cage_m0: 10.0,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn ledger_scale(l: &CycleLedger<f64>) -> f64 {
    l.stages.iter().fold(0.0, |a, e| a.max(e.max_abs()))
}

fn stage_balances(l: &CycleLedger<f64>) {
    for e in &l.stages {
        assert!(e.imbalance().abs() <= 1e-12 * e.max_abs().max(1e-300), "{e:?}");
    }
}

#[test]
fn equal_potentials_extract_no_work() {
    let u = Units::natural();
    let l = run_cycle(&cfg(0.7, 1.0, 0.5, 0.3, 0.3), &u).unwrap();
    assert_eq!(l.totals.work_extracted, 0.0);
    assert_eq!(l.cage_deficit, 0.0);
    assert!(rel(l.particle_deficit, l.w_rad_1 + l.w_rad_2) < 1e-12);
    assert!(l.relative_residual() <= 1e-12);
}

#[test]
fn adiabatic_cycle_radiates_nothing() {
    let u = Units::natural();
    let l = run_cycle(&cfg(0.7, 1.0, f64::INFINITY, 0.9, 0.2), &u).unwrap();
    assert_eq!(l.w_rad_1, 0.0);
    assert_eq!(l.w_rad_2, 0.0);
    assert!(l.particle_deficit.abs() < 1e-15);
    let a = 0.7 * (0.9 - 0.2);
    assert!(rel(l.totals.work_extracted, a) < 1e-15);
    assert!(rel(l.cage_deficit, a) < 1e-15);

    // Slow but finite transients approach the limit.
    let slow = run_cycle(&cfg(0.7, 1.0, 1e6, 0.9, 0.2), &u).unwrap();
    assert!(slow.w_rad_1 + slow.w_rad_2 < 1e-6);
}

#[test]
fn zero_inputs_give_an_empty_ledger() {
    let u = Units::natural();
    let l = run_cycle(&cfg(0.0, 1.0, 1.0, 0.0, 0.0), &u).unwrap();
    for e in l.stages.iter().chain([&l.totals]) {
        assert_eq!(e.max_abs(), 0.0, "{e:?}");
    }
    assert_eq!(l.residual, 0.0);
}

#[test]
fn stages_follow_the_narrative() {
    let u = Units { c: 2.0, zeta: 3.0, kappa: 0.0 };
    let c = cfg(0.4, 0.5, 0.3, 1.5, -0.5);
    let l = run_cycle(&c, &u).unwrap();
    let labels: Vec<Stage> = l.stages.iter().map(|e| e.stage).collect();
    assert_eq!(labels, [Stage::Birth, Stage::Transport, Stage::Annihilation, Stage::Return]);
    let spec = c.shell;
    let w_coul = u.zeta * u.c * 0.16 / (8.0 * std::f64::consts::PI * 0.5);
    assert!(rel(l.w_coul, w_coul) < 1e-14);
    let birth = &l.stages[0];
    assert!(rel(-birth.particle_rest, shell::rest_energy_change(&spec, &u)) < 1e-14);
    assert!(rel(-birth.particle_rest, w_coul + l.w_rad_1) < 1e-12);
    assert!(rel(birth.cage_rest, -0.4 * 1.5) < 1e-15);
    assert!(rel(l.stages[1].work_extracted, 0.4 * 2.0) < 1e-15);
    let ann = &l.stages[2];
    assert!(rel(ann.particle_rest, w_coul - l.w_rad_2) < 1e-12);
    assert!(rel(ann.cage_rest, 0.4 * -0.5) < 1e-15);
    assert_eq!(l.stages[3].max_abs(), 0.0);
    stage_balances(&l);
    assert!(rel(l.final_particle_mass, 10.0 - l.particle_deficit / 4.0) < 1e-15);
    assert!(rel(l.final_cage_mass, 10.0 - l.cage_deficit / 4.0) < 1e-15);
}

#[test]
fn draining_the_particle_is_a_config_error() {
    let u = Units::natural();
    let mut c = cfg(5.0, 0.01, 1.0, 0.0, 0.0);
    c.m0 = 1.0;
    assert!(matches!(run_cycle(&c, &u), Err(Error::Config { key, .. }) if key == "m0"));
    let mut c = cfg(1.0, 1.0, 1.0, 100.0, 0.0);
    c.cage_m0 = 1.0;
    assert!(matches!(run_cycle(&c, &u), Err(Error::Config { key, .. }) if key == "cage_m0"));
    let c = cfg(1.0, 1.0, 1.0, f64::NAN, 0.0);
    assert!(matches!(run_cycle(&c, &u), Err(Error::Config { key, .. }) if key == "phi1"));
}

#[test]
fn single_precision_cycle() {
    let u = Units::<f32>::natural();
    let c = CycleConfig {
        shell: ShellSpec::new(1.0f32, 1.0, 1.0, ChargeMode::Growth).unwrap(),
        phi1: 0.5,
        phi2: 0.1,
        m0: 10.0,
        cage_m0: 10.0,
    };
    let l = run_cycle(&c, &u).unwrap();
    assert!(l.relative_residual() < 1e-6);
}

proptest! {
    #[test]
    fn cycle_never_creates_energy(
        q0 in -3.0f64..3.0,
        lr0 in -3.0f64..1.0,
        ltau in -3.0f64..3.0,
        phi1 in -5.0f64..5.0,
        phi2 in -5.0f64..5.0,
    ) {
        let u = Units::natural();
        let mut c = cfg(q0, 10f64.powf(lr0), 10f64.powf(ltau), phi1, phi2);
        c.m0 = 1e6;
        c.cage_m0 = 1e6;
        let l = run_cycle(&c, &u).unwrap();
        prop_assert!(l.relative_residual() <= 1e-12);
        // The deficit is a difference of entries of size W_Coul, so it is exact to the ledger scale.
        prop_assert!((l.particle_deficit - (l.w_rad_1 + l.w_rad_2)).abs() <= 1e-12 * ledger_scale(&l));
        prop_assert!(rel(l.cage_deficit, q0 * (phi1 - phi2)) <= 1e-12 || (q0 * (phi1 - phi2)).abs() < 1e-300);
    }

    #[test]
    fn deficits_depend_on_separate_inputs(
        q0 in 0.1f64..2.0,
        phi1 in -5.0f64..5.0,
        phi2 in -5.0f64..5.0,
        tau_a in 0.01f64..10.0,
        tau_b in 0.01f64..10.0,
    ) {
        let u = Units::natural();
        let run = |r0, tau, p1, p2| {
            let mut c = cfg(q0, r0, tau, p1, p2);
            c.m0 = 1e3;
            c.cage_m0 = 1e3;
            run_cycle(&c, &u).unwrap()
        };
        let a = run(1.0, tau_a, phi1, phi2);
        let b = run(1.0, tau_a, 0.0, 0.0);
        prop_assert_eq!(a.particle_deficit, b.particle_deficit);
        let c = run(0.3, tau_b, phi1, phi2);
        prop_assert_eq!(a.cage_deficit, c.cage_deficit);
    }
}
