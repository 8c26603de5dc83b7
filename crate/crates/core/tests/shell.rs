use ncharge::field::Units;
use ncharge::quadrature::{integrate, integrate_to_infinity};
use ncharge::shell::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn nat() -> Units<f64> {
    Units::natural()
}

fn spec(q0: f64, r0: f64, tau: f64, mode: ChargeMode) -> ShellSpec<f64> {
    ShellSpec::new(q0, r0, tau, mode).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn charge_laws() {
    let g = spec(2.0, 1.0, 0.5, ChargeMode::Growth);
    let d = g.with_mode(ChargeMode::Decay);
    assert_eq!(charge(0.0, &g), 0.0);
    assert_eq!(charge(-1.0, &g), 0.0);
    assert_eq!(charge(0.0, &d), 2.0);
    assert!(rel(charge(60.0, &g), 2.0) < 1e-15);
    assert!(rel(charge(0.3, &g) + charge(0.3, &d), 2.0) < 1e-15);
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(ShellSpec::new(1.0, 0.0, 1.0, ChargeMode::Growth).is_err());
    assert!(ShellSpec::new(1.0, 1.0, -1.0, ChargeMode::Growth).is_err());
    assert!(ShellSpec::new(f64::NAN, 1.0, 1.0, ChargeMode::Growth).is_err());
    let s = spec(1.0, 1.0, 1.0, ChargeMode::Growth);
    assert!(matches!(potential(0.5, 1.0, &s, &nat()), Err(ncharge::Error::Domain(_))));
    assert!(epsilon_field(0.5, 1.0, &s, &nat()).is_err());
    assert!(radial_e(0.5, 1.0, &s, &nat()).is_err());
    assert!(radiated_energy(0.5, &s, &nat()).is_err());
    assert!(balance_ledger(&s, 0.5, &nat()).is_err());
    assert!(coulomb_energy(1.0, 2.0, 1.0, &nat()).is_err());
}

#[test]
fn exp_ramp_matches_direct_form() {
    for &x in &[0.1, 0.49, 0.5, 1.0, 10.0] {
        let direct = x - 1.0 + (-x as f64).exp();
        assert!(rel(exp_ramp(x), direct) < 1e-12, "x = {x}");
    }
    for &x in &[1e-8f64, 1e-5, 1e-3] {
        let series = x * x / 2.0 - x.powi(3) / 6.0 + x.powi(4) / 24.0 - x.powi(5) / 120.0 + x.powi(6) / 720.0;
        assert!(rel(exp_ramp(x), series) < 1e-14, "x = {x}");
    }
}

#[test]
fn potential_branches() {
    let u = nat();
    let g = spec(1.5, 1.0, 0.7, ChargeMode::Growth);
    let d = g.with_mode(ChargeMode::Decay);
    let r = 4.0;
    assert_eq!(potential(r, 2.9, &g, &u).unwrap(), 0.0);
    let coulomb = 1.5 / (4.0 * PI * r);
    assert!(rel(potential(r, 2.9, &d, &u).unwrap(), coulomb) < 1e-15);
    assert!(rel(potential(r, 200.0, &g, &u).unwrap(), coulomb) < 1e-14);
    assert!(potential(r, 200.0, &d, &u).unwrap().abs() < 1e-60);
}

/// Retarded integral `φ = ζc/(8πrr₀) ∫_{r−r₀}^{r+r₀} q(t − x/c) dx`.
fn retarded_potential(r: f64, t: f64, s: &ShellSpec<f64>, u: &Units<f64>) -> f64 {
    let (a, b) = (r - s.r0, r + s.r0);
    let mut pts = vec![a];
    if u.c * t > a && u.c * t < b {
        pts.push(u.c * t);
    }
    pts.push(b);
    let q = integrate(|x| charge(t - x / u.c, s), &pts, 1e-12, 1e-300).unwrap().value;
    u.zeta * u.c / (8.0 * PI * r * s.r0) * q
}

#[test]
fn potential_matches_retarded_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..200 {
        let mode = if rng.random_bool(0.5) { ChargeMode::Growth } else { ChargeMode::Decay };
        let s = spec(rng.random_range(-2.0..2.0), rng.random_range(0.1..3.0), rng.random_range(0.05..5.0), mode);
        let u = Units { c: rng.random_range(0.5..2.0), zeta: rng.random_range(0.5..2.0), kappa: 0.0 };
        let r = s.r0 + rng.random_range(0.0..5.0);
        let t = rng.random_range(-1.0..15.0);
        let a = potential(r, t, &s, &u).unwrap();
        let b = retarded_potential(r, t, &s, &u);
        assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{a} vs {b}");
    }
}

#[test]
fn epsilon_is_time_derivative_and_e_is_minus_gradient() {
    let u = Units { c: 1.3, zeta: 0.8, kappa: 0.0 };
    for mode in [ChargeMode::Growth, ChargeMode::Decay] {
        let s = spec(1.0, 1.0, 0.6, mode);
        for &(r, t) in &[(1.5, 1.0), (3.0, 2.5), (2.0, 3.5), (5.0, 6.0), (1.0, 0.8)] {
            let h = 1e-5;
            let dphi_dt = (potential(r, t + h, &s, &u).unwrap() - potential(r, t - h, &s, &u).unwrap()) / (2.0 * h);
            let eps = epsilon_field(r, t, &s, &u).unwrap();
            assert!(rel(dphi_dt / u.c, eps) < 1e-8, "eps at r={r}, t={t}");
            let phi = |x: f64| potential(x, t, &s, &u).unwrap();
            let dphi_dr = if r - h < s.r0 {
                (-3.0 * phi(r) + 4.0 * phi(r + h) - phi(r + 2.0 * h)) / (2.0 * h)
            } else {
                (phi(r + h) - phi(r - h)) / (2.0 * h)
            };
            let e = radial_e(r, t, &s, &u).unwrap();
            assert!(rel(-dphi_dr, e) < 1e-8, "E at r={r}, t={t}: {} vs {e}", -dphi_dr);
        }
    }
}

#[test]
fn causality_and_front_values() {
    let u = nat();
    let g = spec(1.0, 1.0, 1.0, ChargeMode::Growth);
    let d = g.with_mode(ChargeMode::Decay);
    for i in 0..100 {
        let r = 1.0 + 0.1 * i as f64;
        let t = (r - 1.0) * (i as f64 / 100.0);
        assert_eq!(epsilon_field(r, t, &g, &u).unwrap(), 0.0);
        assert_eq!(radial_e(r, t, &g, &u).unwrap(), 0.0);
        assert!(rel(radial_e(r, t, &d, &u).unwrap(), 1.0 / (4.0 * PI * r * r)) < 1e-14);
    }
}

#[test]
fn modes_are_dual_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u = nat();
    for _ in 0..1000 {
        let g = spec(rng.random_range(-3.0..3.0), rng.random_range(0.1..2.0), rng.random_range(0.1..4.0), ChargeMode::Growth);
        let d = g.with_mode(ChargeMode::Decay);
        let r = g.r0 + rng.random_range(0.0..10.0);
        let t = rng.random_range(-2.0..20.0);
        assert_eq!(epsilon_field(r, t, &d, &u).unwrap(), -epsilon_field(r, t, &g, &u).unwrap());
    }
}

#[test]
fn continuity_at_branch_boundaries() {
    let u = nat();
    for mode in [ChargeMode::Growth, ChargeMode::Decay] {
        let s = spec(1.0, 0.8, 0.4, mode);
        for &r in &[0.8, 1.0, 2.5, 7.0] {
            for t0 in [(r - s.r0) / u.c, (r + s.r0) / u.c] {
                let (lo, hi) = (t0 * (1.0 - 1e-15) - 1e-300, t0 * (1.0 + 1e-15) + 1e-16);
                for f in [potential::<f64>, epsilon_field::<f64>, radial_e::<f64>] {
                    let (a, b) = (f(r, lo, &s, &u).unwrap(), f(r, hi, &s, &u).unwrap());
                    let scale = f(r, t0 + 1.0, &s, &u).unwrap().abs().max(1e-3);
                    assert!((a - b).abs() <= 1e-12 * scale, "r={r} t0={t0}: {a} vs {b}");
                }
            }
        }
    }
}

fn flux_quadrature(big_r: f64, s: &ShellSpec<f64>, u: &Units<f64>) -> f64 {
    let kinks = [(big_r - s.r0) / u.c, (big_r + s.r0) / u.c];
    let f = |t: f64| {
        let e = epsilon_field(big_r, t, s, u).unwrap();
        let er = radial_e(big_r, t, s, u).unwrap();
        e * er / u.zeta * 4.0 * PI * big_r * big_r
    };
    integrate_to_infinity(f, 0.0, &kinks, 1e-10, 1e-300).unwrap().value
}

#[test]
fn radiated_energy_matches_flux_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let mode = if rng.random_bool(0.5) { ChargeMode::Growth } else { ChargeMode::Decay };
        let s = spec(rng.random_range(0.2..2.0), rng.random_range(0.2..2.0), rng.random_range(0.1..3.0), mode);
        let u = Units { c: rng.random_range(0.5..2.0), zeta: rng.random_range(0.5..2.0), kappa: 0.0 };
        let big_r = s.r0 * rng.random_range(1.0..20.0);
        let a = radiated_energy(big_r, &s, &u).unwrap();
        let b = flux_quadrature(big_r, &s, &u);
        assert!(rel(a, b) < 5e-3 && rel(a, b) < 1e-7, "{mode:?}: {a} vs {b}");
    }
}

#[test]
fn radiated_energy_limits() {
    let u = nat();
    let s = spec(1.0, 1.0, 1.0, ChargeMode::Growth);
    let far = radiated_energy(f64::INFINITY, &s, &u).unwrap();
    let x: f64 = 2.0;
    let second = 1.0 / (8.0 * PI) * (1.0 - (1.0 - (-x).exp()) / x);
    assert!(rel(far, second) < 1e-15);
    let point = spec(1.0, 1e-6, 1.0, ChargeMode::Growth);
    let w = radiated_energy(f64::INFINITY, &point, &u).unwrap();
    assert!(rel(w, 1.0 / (8.0 * PI)) < 1e-5);
}

#[test]
fn rest_energy_matches_shell_work_quadrature() {
    let u = Units { c: 1.7, zeta: 0.6, kappa: 0.0 };
    for mode in [ChargeMode::Growth, ChargeMode::Decay] {
        let s = spec(1.2, 0.9, 0.5, mode);
        let kinks = [2.0 * s.r0 / u.c];
        let work = integrate_to_infinity(
            |t| u.c * charge(t, &s) * epsilon_field(s.r0, t, &s, &u).unwrap(),
            0.0,
            &kinks,
            1e-12,
            1e-300,
        )
        .unwrap()
        .value;
        // Growth releases c∫qε dt; decay absorbs −c∫qε dt.
        let expect = rest_energy_change(&s, &u);
        let got = if mode == ChargeMode::Growth { work } else { -work };
        assert!(rel(got, expect) < 1e-9, "{mode:?}: {got} vs {expect}");
    }
}

#[test]
fn rest_energy_limits() {
    let u = nat();
    let d = spec(1.0, 1.0, 1e-9, ChargeMode::Decay);
    assert!(rest_energy_change(&d, &u) < 1e-9);
    let g = spec(1.0, 1e-4, 1.0, ChargeMode::Growth);
    let limit = 1.0 / (8.0 * PI * 1e-4) + 1.0 / (8.0 * PI);
    assert!(rel(rest_energy_change(&g, &u), limit) < 1e-7);
}

#[test]
fn coulomb_energy_examples() {
    let u = nat();
    assert_eq!(coulomb_energy(1.0, 2.0, 2.0, &u).unwrap(), 0.0);
    assert!(rel(coulomb_energy(2.0, 0.5, f64::INFINITY, &u).unwrap(), 4.0 / (8.0 * PI * 0.5)) < 1e-15);
    let q: f64 = 1.3;
    let vol = integrate(
        |r: f64| {
            let e = q / (4.0 * PI * r * r);
            e * e / 2.0 * 4.0 * PI * r * r
        },
        &[0.7, 9.0],
        1e-12,
        1e-300,
    )
    .unwrap()
    .value;
    assert!(rel(vol, coulomb_energy(q, 0.7, 9.0, &u).unwrap()) < 1e-6);
}

#[test]
fn ledger_identities() {
    let u = nat();
    let g = spec(1.0, 1.0, 1.0, ChargeMode::Growth);
    assert!(balance_ledger(&g, 10.0, &u).unwrap().relative_residual() <= 1e-12);
    let d = g.with_mode(ChargeMode::Decay);
    assert!(balance_ledger(&d, 10.0, &u).unwrap().relative_residual() <= 1e-12);
    for ratio in [1e-3, 1e-2, 1e-1, 1.0] {
        for rr in [1.0, 10.0, 100.0, 1000.0] {
            for mode in [ChargeMode::Growth, ChargeMode::Decay] {
                let s = spec(0.7, ratio, 1.0, mode);
                let l = balance_ledger(&s, rr * s.r0, &u).unwrap();
                assert!(l.relative_residual() <= 1e-12, "{mode:?} {ratio} {rr}: {l:?}");
            }
        }
    }
}

#[test]
fn ledger_point_charge_limits() {
    let u = nat();
    let (q, r0, tau, big_r) = (1.0, 1e-6, 1.0, 1e9);
    let g = balance_ledger(&spec(q, r0, tau, ChargeMode::Growth), big_r, &u).unwrap();
    let w_coul = q * q / (8.0 * PI * r0);
    let w_rad = q * q / (8.0 * PI * tau);
    assert!(rel(g.delta_rest_energy, w_coul + w_rad) < 1e-4);
    assert!(rel(g.w_coul, w_coul) < 1e-4);
    assert!(rel(g.w_rad, w_rad) < 1e-4);
    let d = balance_ledger(&spec(q, r0, tau, ChargeMode::Decay), big_r, &u).unwrap();
    assert!(rel(d.delta_rest_energy, w_coul - w_rad) < 1e-4);
    assert!(rel(d.w_rad, w_rad) < 1e-4);
}

#[test]
fn renormalization_examples() {
    let u = Units { c: 2.0, zeta: 1.0, kappa: 0.0 };
    let s = spec(1.0, 1.0, 1e30, ChargeMode::Growth);
    let (_, total) = renormalization_masses(5.0, &s, &u);
    assert!(rel(total, 5.0) < 1e-14);
    let s = spec(1.0, 0.3, 0.7, ChargeMode::Growth);
    let (m_e, total) = renormalization_masses(5.0, &s, &u);
    let w_coul = coulomb_energy(1.0, 0.3, f64::INFINITY, &u).unwrap();
    let w_rad = radiated_energy(f64::INFINITY, &s, &u).unwrap();
    assert!(rel(m_e + w_coul / 4.0 + w_rad / 4.0, 5.0) < 1e-14);
    assert!(rel(total, 5.0 - w_rad / 4.0) < 1e-14);
    // Shrinking the shell drives m_e down without bound while the total stays finite.
    let mut last = f64::INFINITY;
    for r0 in [1e-4, 1e-5, 1e-6] {
        let (m_e, total) = renormalization_masses(5.0, &spec(1.0, r0, 0.7, ChargeMode::Growth), &u);
        assert!(m_e < last);
        last = m_e;
        let expect = 5.0 - 1.0 * 2.0 / (8.0 * PI * 2.0 * 0.7) / 4.0;
        assert!(rel(total, expect) < 1e-5);
    }
}

#[test]
fn single_precision_smoke() {
    let s = ShellSpec::<f32>::new(1.0, 1.0, 1.0, ChargeMode::Growth).unwrap();
    let u = Units::<f32>::natural();
    let l = balance_ledger(&s, 10.0, &u).unwrap();
    assert!(l.relative_residual() < 1e-6);
    let e = radial_e(3.0f32, 100.0, &s, &u).unwrap();
    assert!((e - 1.0 / (4.0 * std::f32::consts::PI * 9.0)).abs() < 1e-6);
}

proptest! {
    #[test]
    fn transient_vanishes_before_front(
        q0 in -3.0f64..3.0, r0 in 0.1f64..3.0, tau in 0.05f64..5.0,
        dr in 0.0f64..10.0, frac in 0.0f64..1.0,
    ) {
        let s = spec(q0, r0, tau, ChargeMode::Growth);
        let r = r0 + dr;
        let t = dr * frac;
        prop_assert_eq!(epsilon_field(r, t, &s, &nat()).unwrap(), 0.0);
        prop_assert_eq!(potential(r, t, &s, &nat()).unwrap(), 0.0);
    }

    #[test]
    fn potentials_are_complementary(
        q0 in -3.0f64..3.0, r0 in 0.1f64..3.0, tau in 0.05f64..5.0,
        dr in 0.0f64..10.0, t in -1.0f64..30.0,
    ) {
        let g = spec(q0, r0, tau, ChargeMode::Growth);
        let d = g.with_mode(ChargeMode::Decay);
        let r = r0 + dr;
        let sum = potential(r, t, &g, &nat()).unwrap() + potential(r, t, &d, &nat()).unwrap();
        let stat = coulomb_potential(q0, r, &nat());
        prop_assert!((sum - stat).abs() <= 1e-13 * stat.abs().max(1e-300));
    }
}
