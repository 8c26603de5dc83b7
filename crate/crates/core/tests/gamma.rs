use ncharge::field::{FieldPoint, SYSTEM_TO_4D, system_residual, SourcePoint, Units};
use ncharge::gamma::*;
use ncharge::mms::{random_event, random_field_point, Quadratic16};
use ncharge::Vec3;
use num_complex::Complex;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type C = Complex<f64>;

fn mat_f64(m: &IMat4) -> [[C; 4]; 4] {
    m.map(|row| row.map(|z| C::new(z.re as f64, z.im as f64)))
}

fn cmat_mul(a: &[[C; 4]; 4], b: &[[C; 4]; 4]) -> [[C; 4]; 4] {
    let mut c = [[C::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

/// Independent projection `Tr(Γ†M)/Tr(Γ†Γ)`.
fn trace_projection(m: &[[C; 4]; 4]) -> [C; 16] {
    let basis = GammaBasis::get();
    std::array::from_fn(|i| {
        let g = mat_f64(basis.matrix(i));
        let mut num = C::new(0.0, 0.0);
        let mut den = C::new(0.0, 0.0);
        for r in 0..4 {
            for k in 0..4 {
                num += g[r][k].conj() * m[r][k];
                den += g[r][k].conj() * g[r][k];
            }
        }
        num / den
    })
}

#[test]
fn anticommutation_is_exact() {
    let basis = GammaBasis::get();
    for mu in 0..4 {
        for nu in 0..4 {
            let ab = imat_mul(basis.gamma(mu), basis.gamma(nu));
            let ba = imat_mul(basis.gamma(nu), basis.gamma(mu));
            for i in 0..4 {
                for j in 0..4 {
                    let expect = if i == j && mu == nu { 2 * ETA[mu] } else { 0 };
                    assert_eq!(ab[i][j] + ba[i][j], Complex::new(expect, 0));
                }
            }
            let h = multiply(&Hypercomplex::<f64>::basis(1 + mu), &Hypercomplex::basis(1 + nu))
                + multiply(&Hypercomplex::<f64>::basis(1 + nu), &Hypercomplex::basis(1 + mu));
            let mut expect = Hypercomplex::zero();
            expect.coeffs[0] = C::new(2.0 * (if mu == nu { ETA[mu] } else { 0 }) as f64, 0.0);
            assert_eq!(h, expect);
        }
    }
}

#[test]
fn closure_and_structure_constants_match_matrices() {
    let basis = GammaBasis::get();
    for i in 0..BASIS_LEN {
        for j in 0..BASIS_LEN {
            let (k, ph) = basis.product(i, j);
            let direct = cmat_mul(&mat_f64(basis.matrix(i)), &mat_f64(basis.matrix(j)));
            let proj = trace_projection(&direct);
            for (s, c) in proj.iter().enumerate() {
                let expect = if s == k { ph.to_complex::<f64>() } else { C::new(0.0, 0.0) };
                assert!((c - expect).norm() < 1e-15, "({i},{j}) slot {s}");
            }
        }
    }
}

#[test]
fn basis_is_linearly_independent() {
    // The trace form Tr(Γᵢ†Γⱼ) = 4δᵢⱼ makes the Gram matrix nonsingular.
    let basis = GammaBasis::get();
    for i in 0..BASIS_LEN {
        let proj = trace_projection(&mat_f64(basis.matrix(i)));
        for (j, c) in proj.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((c - C::new(expect, 0.0)).norm() < 1e-15);
        }
    }
}

#[test]
fn multiply_examples() {
    let g = |i| Hypercomplex::<f64>::basis(i);
    assert_eq!(multiply(&g(0), &g(2)), g(2));
    let sq = multiply(&g(2), &g(2));
    assert_eq!(sq.coeffs[0], C::new(-1.0, 0.0));
    // γ⁰γ¹ · γ²γ³ = γ⁰γ¹γ²γ³
    let p = multiply(&g(5), &g(8));
    assert_eq!(p, g(15));
}

#[test]
fn compose_examples() {
    let zero = compose_psi(&FieldPoint::<f64>::zero());
    assert_eq!(zero, Hypercomplex::zero());
    let eps = compose_psi(&FieldPoint { eps: 1.0, ..FieldPoint::zero() });
    assert_eq!(eps, Hypercomplex::basis(0));
    let ex = compose_psi(&FieldPoint { e: Vec3::new(1.0, 0.0, 0.0), ..FieldPoint::zero() });
    assert_eq!(ex, Hypercomplex::basis(5));
}

#[test]
fn decompose_hand_built_beta_matrix() {
    let basis = GammaBasis::get();
    let m = mat_f64(basis.matrix(15)).map(|row| row.map(|z| z * 2.0));
    let f = decompose(&Hypercomplex::from_matrix(&m)).unwrap();
    assert_eq!(f, FieldPoint { beta: 2.0, ..FieldPoint::zero() });
    // Same through the independent projection.
    let proj = trace_projection(&m);
    assert!((proj[15] - C::new(2.0, 0.0)).norm() < 1e-15);
    assert_eq!(decompose(&Hypercomplex::<f64>::zero()).unwrap(), FieldPoint::zero());
}

#[test]
fn decompose_rejects_wrong_phase() {
    let mut h = Hypercomplex::<f64>::zero();
    h.coeffs[1] = C::new(1.0, 0.0); // V⁰ slot must be imaginary
    assert!(matches!(decompose(&h), Err(ncharge::Error::NonRealDecomposition { slot: 1, .. })));
}

#[test]
fn round_trip_hundred_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let f: FieldPoint<f64> = random_field_point(&mut rng, 10.0);
        let h = compose_psi(&f);
        let back = decompose(&h).unwrap();
        let via_matrix = decompose(&Hypercomplex::from_matrix(&h.to_matrix())).unwrap();
        let scale = f.max_abs();
        for (a, b) in f.to_array().iter().zip(back.to_array()) {
            assert!((a - b).abs() <= 1e-14 * scale);
        }
        for (a, b) in f.to_array().iter().zip(via_matrix.to_array()) {
            assert!((a - b).abs() <= 1e-14 * scale);
        }
    }
}

#[test]
fn constant_fields_give_zero_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let jet = FieldJet { value: random_field_point(&mut rng, 1.0), ..Default::default() };
    assert!(dirac_residual(&jet, 0.0).iter().all(|r| *r == 0.0));
}

#[test]
fn linear_eps_hits_only_the_gradient_slot() {
    let mut jet = FieldJet::<f64>::default();
    jet.grad[0].eps = 1.0;
    let r = dirac_residual(&jet, 0.0);
    for (s, v) in r.iter().enumerate() {
        assert_eq!(*v, if s == 2 { 1.0 } else { 0.0 }, "slot {s}");
    }
}

#[test]
fn dirac_residual_matches_direct_tensor_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for kappa in [0.0, 0.5, 0.7, 2.0] {
        for _ in 0..100 {
            let poly = Quadratic16::<f64>::random(&mut rng, 1.0);
            let jet = poly.field_jet(&random_event(&mut rng, 1.0));
            let a = dirac_residual(&jet, kappa);
            let b = system_lhs_4d(&jet, kappa);
            let tol = 1e-12 * (1.0 + jet.max_abs());
            for s in 0..16 {
                assert!((a[s] - b[s]).abs() <= tol, "kappa {kappa} slot {s}: {} vs {}", a[s], b[s]);
            }
        }
    }
}

#[test]
fn three_dimensional_system_matches_covariant_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for kappa in [0.0, 0.5, 2.0] {
        let u = Units { kappa, ..Units::natural() };
        for _ in 0..100 {
            let poly = Quadratic16::<f64>::random(&mut rng, 1.0);
            let jet = poly.field_jet(&random_event(&mut rng, 1.0));
            let sys = system_residual(&jet, &SourcePoint::zero(), &u);
            let cov = system_lhs_4d(&jet, kappa);
            for (i, &(slot, sign)) in SYSTEM_TO_4D.iter().enumerate() {
                let d = sys[i] - sign as f64 * cov[slot];
                assert!(d.abs() <= 1e-12 * (1.0 + jet.max_abs()), "row {i}");
            }
        }
    }
}

#[test]
fn single_precision_round_trip() {
    let f = FieldPoint::<f32>::from_array(std::array::from_fn(|i| i as f32 - 7.5));
    let back = decompose(&compose_psi(&f)).unwrap();
    assert_eq!(f, back);
    let mut jet = FieldJet::<f32>::default();
    jet.grad[0].eps = 1.0;
    assert_eq!(dirac_residual(&jet, 0.0)[2], 1.0);
}

proptest! {
    #[test]
    fn every_product_is_a_phase_times_one_element(i in 0usize..16, j in 0usize..16) {
        let p = multiply(&Hypercomplex::<f64>::basis(i), &Hypercomplex::basis(j));
        let nonzero: Vec<_> = p.coeffs.iter().filter(|c| c.norm() > 0.0).collect();
        prop_assert_eq!(nonzero.len(), 1);
        let c = nonzero[0];
        prop_assert!((c.norm() - 1.0).abs() == 0.0);
        prop_assert!(c.re == 0.0 || c.im == 0.0);
    }

    #[test]
    fn multiply_matches_matrix_product(
        a in proptest::array::uniform32(-2.0f64..2.0),
        b in proptest::array::uniform32(-2.0f64..2.0),
    ) {
        let ha = Hypercomplex { coeffs: std::array::from_fn(|i| C::new(a[2 * i], a[2 * i + 1])) };
        let hb = Hypercomplex { coeffs: std::array::from_fn(|i| C::new(b[2 * i], b[2 * i + 1])) };
        let via_table = multiply(&ha, &hb);
        let via_matrix = Hypercomplex::from_matrix(&cmat_mul(&ha.to_matrix(), &hb.to_matrix()));
        for s in 0..16 {
            prop_assert!((via_table.coeffs[s] - via_matrix.coeffs[s]).norm() < 1e-12);
        }
    }

    #[test]
    fn levi_civita_is_antisymmetric(p in proptest::array::uniform4(0usize..4), i in 0usize..3) {
        let mut q = p;
        q.swap(i, i + 1);
        prop_assert_eq!(levi_civita(p), -levi_civita(q));
    }
}
