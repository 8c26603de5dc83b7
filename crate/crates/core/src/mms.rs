//! Quadratic polynomial fields in (x⁰, x¹, x², x³) with exact derivative jets, used to
//! manufacture solutions for residual and conservation checks.

use rand::Rng;

use crate::field::{FieldPoint, PotentialJet2, PotentialPoint};
use crate::gamma::FieldJet;
use crate::scalar::Real;

/// Sixteen independent quadratics `a + bᵀx + xᵀCx` with symmetric `C`.
#[derive(Clone, Debug)]
pub struct Quadratic16<T> {
    a: [T; 16],
    b: [[T; 4]; 16],
    c: [[[T; 4]; 4]; 16],
}

impl<T: Real> Quadratic16<T> {
    /// Coefficients uniform in `[-scale, scale]`.
    pub fn random<R: Rng>(rng: &mut R, scale: f64) -> Self {
        let mut draw = || T::of(rng.random_range(-scale..=scale));
        let a = std::array::from_fn(|_| draw());
        let b = std::array::from_fn(|_| std::array::from_fn(|_| draw()));
        let mut c = [[[T::zero(); 4]; 4]; 16];
        for ci in c.iter_mut() {
            for m in 0..4 {
                for n in m..4 {
                    let v = draw();
                    ci[m][n] = v;
                    ci[n][m] = v;
                }
            }
        }
        Self { a, b, c }
    }

    pub fn value(&self, x: &[T; 4]) -> [T; 16] {
        std::array::from_fn(|i| {
            let mut s = self.a[i];
            for m in 0..4 {
                s = s + self.b[i][m] * x[m];
                for n in 0..4 {
                    s = s + self.c[i][m][n] * x[m] * x[n];
                }
            }
            s
        })
    }

    pub fn deriv(&self, mu: usize, x: &[T; 4]) -> [T; 16] {
        std::array::from_fn(|i| {
            let mut s = self.b[i][mu];
            for n in 0..4 {
                s = s + T::two() * self.c[i][mu][n] * x[n];
            }
            s
        })
    }

    pub fn deriv2(&self, mu: usize, nu: usize) -> [T; 16] {
        std::array::from_fn(|i| T::two() * self.c[i][mu][nu])
    }

    /// Field jet at `x` reading the sixteen components in field column order.
    pub fn field_jet(&self, x: &[T; 4]) -> FieldJet<T> {
        let fp = FieldPoint::from_array;
        FieldJet {
            value: fp(self.value(x)),
            dt: fp(self.deriv(0, x)),
            grad: [fp(self.deriv(1, x)), fp(self.deriv(2, x)), fp(self.deriv(3, x))],
        }
    }

    /// Second-order potential jet at `x` reading the components in potential column order.
    pub fn potential_jet(&self, x: &[T; 4]) -> PotentialJet2<T> {
        let pp = PotentialPoint::from_array;
        PotentialJet2 {
            value: pp(self.value(x)),
            d: std::array::from_fn(|mu| pp(self.deriv(mu, x))),
            d2: std::array::from_fn(|mu| std::array::from_fn(|nu| pp(self.deriv2(mu, nu)))),
        }
    }
}

/// Random point in the cube `[-scale, scale]⁴`.
pub fn random_event<T: Real, R: Rng>(rng: &mut R, scale: f64) -> [T; 4] {
    std::array::from_fn(|_| T::of(rng.random_range(-scale..=scale)))
}

/// Random field point with components in `[-scale, scale]`.
pub fn random_field_point<T: Real, R: Rng>(rng: &mut R, scale: f64) -> FieldPoint<T> {
    FieldPoint::from_array(std::array::from_fn(|_| T::of(rng.random_range(-scale..=scale))))
}
