//! Sixteen-unit hypercomplex algebra spanned by products of Dirac matrices.
//!
//! The basis is ordered as the field ansatz lists it:
//! `I`, `γ⁰..γ³`, `γ⁰γ¹ γ⁰γ² γ⁰γ³`, `γ²γ³ γ³γ¹ γ¹γ²`,
//! `γ¹γ²γ³ γ⁰γ²γ³ γ⁰γ³γ¹ γ⁰γ¹γ²`, `γ⁰γ¹γ²γ³`.

use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::FieldPoint;
use crate::scalar::Real;
use crate::vec3::Vec3;

pub const BASIS_LEN: usize = 16;

pub const BASIS_LABELS: [&str; BASIS_LEN] = [
    "I", "γ0", "γ1", "γ2", "γ3", "γ0γ1", "γ0γ2", "γ0γ3", "γ2γ3", "γ3γ1", "γ1γ2", "γ1γ2γ3",
    "γ0γ2γ3", "γ0γ3γ1", "γ0γ1γ2", "γ0γ1γ2γ3",
];

/// Gamma-index words whose ordered product gives each basis element.
const BASIS_WORDS: [&[usize]; BASIS_LEN] = [
    &[],
    &[0],
    &[1],
    &[2],
    &[3],
    &[0, 1],
    &[0, 2],
    &[0, 3],
    &[2, 3],
    &[3, 1],
    &[1, 2],
    &[1, 2, 3],
    &[0, 2, 3],
    &[0, 3, 1],
    &[0, 1, 2],
    &[0, 1, 2, 3],
];

/// Minkowski metric diagonal, signature (+, −, −, −).
pub const ETA: [i32; 4] = [1, -1, -1, -1];

/// Phase relating each slot of the Dirac residual to the matching real field equation:
/// residual coefficient = phase × equation left side.
pub const RESIDUAL_PHASES: [Phase; BASIS_LEN] = [
    Phase(2),
    Phase(1),
    Phase(1),
    Phase(1),
    Phase(1),
    Phase(0),
    Phase(0),
    Phase(0),
    Phase(0),
    Phase(0),
    Phase(0),
    Phase(1),
    Phase(1),
    Phase(1),
    Phase(1),
    Phase(2),
];

/// Exact integer 4×4 complex matrix.
pub type IMat4 = [[Complex<i32>; 4]; 4];

/// A power of the imaginary unit, `i^k` with `k` in `0..4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Phase(pub u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn inverse(self) -> Phase {
        Phase((4 - self.0) % 4)
    }

    pub fn to_complex<T: Real>(self) -> Complex<T> {
        let (o, z) = (T::one(), T::zero());
        match self.0 % 4 {
            0 => Complex::new(o, z),
            1 => Complex::new(z, o),
            2 => Complex::new(-o, z),
            _ => Complex::new(z, -o),
        }
    }

    fn to_int(self) -> Complex<i32> {
        match self.0 % 4 {
            0 => Complex::new(1, 0),
            1 => Complex::new(0, 1),
            2 => Complex::new(-1, 0),
            _ => Complex::new(0, -1),
        }
    }

    /// Multiplies a complex number by this phase without rounding.
    pub fn apply<T: Real>(self, z: Complex<T>) -> Complex<T> {
        match self.0 % 4 {
            0 => z,
            1 => Complex::new(-z.im, z.re),
            2 => -z,
            _ => Complex::new(z.im, -z.re),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, o: Phase) -> Phase {
        Phase((self.0 + o.0) % 4)
    }
}

fn imat_zero() -> IMat4 {
    [[Complex::new(0, 0); 4]; 4]
}

fn imat_identity() -> IMat4 {
    let mut m = imat_zero();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex::new(1, 0);
    }
    m
}

pub fn imat_mul(a: &IMat4, b: &IMat4) -> IMat4 {
    let mut c = imat_zero();
    for i in 0..4 {
        for j in 0..4 {
            let mut s = Complex::new(0, 0);
            for k in 0..4 {
                s += a[i][k] * b[k][j];
            }
            c[i][j] = s;
        }
    }
    c
}

fn imat_scale(a: &IMat4, z: Complex<i32>) -> IMat4 {
    a.map(|row| row.map(|x| x * z))
}

/// Dirac-representation gamma matrices: γ⁰ = diag(1,1,−1,−1), γᵏ = [[0, σₖ], [−σₖ, 0]].
pub fn dirac_gammas() -> [IMat4; 4] {
    let c = |re, im| Complex::new(re, im);
    let z = c(0, 0);
    let pauli: [[[Complex<i32>; 2]; 2]; 3] = [
        [[z, c(1, 0)], [c(1, 0), z]],
        [[z, c(0, -1)], [c(0, 1), z]],
        [[c(1, 0), z], [z, c(-1, 0)]],
    ];
    let mut g = [imat_zero(); 4];
    g[0][0][0] = c(1, 0);
    g[0][1][1] = c(1, 0);
    g[0][2][2] = c(-1, 0);
    g[0][3][3] = c(-1, 0);
    for (k, s) in pauli.iter().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                g[k + 1][i][j + 2] = s[i][j];
                g[k + 1][i + 2][j] = -s[i][j];
            }
        }
    }
    g
}

/// Basis matrices with their precomputed multiplication table.
pub struct GammaBasis {
    matrices: [IMat4; BASIS_LEN],
    table: [[(usize, Phase); BASIS_LEN]; BASIS_LEN],
}

impl GammaBasis {
    /// Shared instance, built on first use.
    pub fn get() -> &'static GammaBasis {
        static BASIS: OnceLock<GammaBasis> = OnceLock::new();
        BASIS.get_or_init(GammaBasis::build)
    }

    fn build() -> GammaBasis {
        let g = dirac_gammas();
        let matrices = BASIS_WORDS.map(|word| {
            word.iter().fold(imat_identity(), |m, &mu| imat_mul(&m, &g[mu]))
        });
        let mut table = [[(0, Phase::ONE); BASIS_LEN]; BASIS_LEN];
        for i in 0..BASIS_LEN {
            for j in 0..BASIS_LEN {
                let p = imat_mul(&matrices[i], &matrices[j]);
                table[i][j] = (0..BASIS_LEN)
                    .flat_map(|k| (0..4u8).map(move |ph| (k, Phase(ph))))
                    .find(|&(k, ph)| imat_scale(&matrices[k], ph.to_int()) == p)
                    .expect("basis is closed under multiplication");
            }
        }
        GammaBasis { matrices, table }
    }

    pub fn matrix(&self, i: usize) -> &IMat4 {
        &self.matrices[i]
    }

    /// `γ^μ` for `μ` in `0..4`.
    pub fn gamma(&self, mu: usize) -> &IMat4 {
        &self.matrices[1 + mu]
    }

    /// `Γᵢ Γⱼ = phase · Γₖ`, returned as `(k, phase)`.
    pub fn product(&self, i: usize, j: usize) -> (usize, Phase) {
        self.table[i][j]
    }
}

/// Coefficients over the sixteen basis elements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hypercomplex<T> {
    pub coeffs: [Complex<T>; BASIS_LEN],
}

impl<T: Real> Default for Hypercomplex<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Real> Hypercomplex<T> {
    pub fn zero() -> Self {
        Self { coeffs: [Complex::new(T::zero(), T::zero()); BASIS_LEN] }
    }

    /// The basis element `Γᵢ` itself.
    pub fn basis(i: usize) -> Self {
        let mut h = Self::zero();
        h.coeffs[i] = Complex::new(T::one(), T::zero());
        h
    }

    pub fn scale(&self, z: Complex<T>) -> Self {
        Self { coeffs: self.coeffs.map(|c| c * z) }
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    /// Σ coeffᵢ Γᵢ as a 4×4 complex matrix.
    pub fn to_matrix(&self) -> [[Complex<T>; 4]; 4] {
        let basis = GammaBasis::get();
        let mut m = [[Complex::new(T::zero(), T::zero()); 4]; 4];
        for (i, c) in self.coeffs.iter().enumerate() {
            let g = basis.matrix(i);
            for r in 0..4 {
                for k in 0..4 {
                    let e = g[r][k];
                    if e.re != 0 || e.im != 0 {
                        let e = Complex::new(T::of(e.re as f64), T::of(e.im as f64));
                        m[r][k] = m[r][k] + *c * e;
                    }
                }
            }
        }
        m
    }

    /// Expands a matrix in the basis: `cᵢ = Tr(Γᵢ⁻¹ M) / 4`.
    pub fn from_matrix(m: &[[Complex<T>; 4]; 4]) -> Self {
        let basis = GammaBasis::get();
        let quarter = T::of(0.25);
        let mut h = Self::zero();
        for i in 0..BASIS_LEN {
            // Γᵢ² = phase·I, so Γᵢ⁻¹ = phase⁻¹·Γᵢ.
            let (_, sq) = basis.product(i, i);
            let g = basis.matrix(i);
            let mut tr = Complex::new(T::zero(), T::zero());
            for r in 0..4 {
                for k in 0..4 {
                    let e = g[r][k];
                    if e.re != 0 || e.im != 0 {
                        tr = tr + Complex::new(T::of(e.re as f64), T::of(e.im as f64)) * m[k][r];
                    }
                }
            }
            h.coeffs[i] = sq.inverse().apply(tr) * quarter;
        }
        h
    }
}

impl<T: Real> Add for Hypercomplex<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut c = self.coeffs;
        for (a, b) in c.iter_mut().zip(o.coeffs.iter()) {
            *a = *a + *b;
        }
        Self { coeffs: c }
    }
}

impl<T: Real> Sub for Hypercomplex<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut c = self.coeffs;
        for (a, b) in c.iter_mut().zip(o.coeffs.iter()) {
            *a = *a - *b;
        }
        Self { coeffs: c }
    }
}

/// Product in the algebra, using the exact structure constants.
pub fn multiply<T: Real>(a: &Hypercomplex<T>, b: &Hypercomplex<T>) -> Hypercomplex<T> {
    let basis = GammaBasis::get();
    let mut out = Hypercomplex::zero();
    for (i, ai) in a.coeffs.iter().enumerate() {
        if ai.re == T::zero() && ai.im == T::zero() {
            continue;
        }
        for (j, bj) in b.coeffs.iter().enumerate() {
            let (k, ph) = basis.product(i, j);
            out.coeffs[k] = out.coeffs[k] + ph.apply(*ai * *bj);
        }
    }
    out
}

impl<T: Real> Mul for Hypercomplex<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        multiply(&self, &o)
    }
}

/// Field point with all first derivatives; `dt` is the derivative per unit `c·t`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldJet<T> {
    pub value: FieldPoint<T>,
    pub dt: FieldPoint<T>,
    pub grad: [FieldPoint<T>; 3],
}

impl<T: Real> FieldJet<T> {
    /// `∂_ν` of the fields, `ν = 0` being the time derivative.
    pub fn d(&self, nu: usize) -> &FieldPoint<T> {
        if nu == 0 {
            &self.dt
        } else {
            &self.grad[nu - 1]
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.dt.is_finite() && self.grad.iter().all(|g| g.is_finite())
    }

    pub fn max_abs(&self) -> T {
        self.grad.iter().fold(self.value.max_abs().max(self.dt.max_abs()), |m, g| m.max(g.max_abs()))
    }
}

/// Places the sixteen fields on their basis slots, including the `i` factors on `V_ν` and `U_ν`.
pub fn compose_psi<T: Real>(f: &FieldPoint<T>) -> Hypercomplex<T> {
    let z = T::zero();
    let re = |x: T| Complex::new(x, z);
    let im = |x: T| Complex::new(z, x);
    Hypercomplex {
        coeffs: [
            re(f.eps),
            im(f.v0),
            im(-f.v[0]),
            im(-f.v[1]),
            im(-f.v[2]),
            re(f.e[0]),
            re(f.e[1]),
            re(f.e[2]),
            re(-f.cb[0]),
            re(-f.cb[1]),
            re(-f.cb[2]),
            im(f.u0),
            im(-f.u[0]),
            im(-f.u[1]),
            im(-f.u[2]),
            re(f.beta),
        ],
    }
}

/// Inverse of [`compose_psi`]; fails if a slot carries the wrong phase.
pub fn decompose<T: Real>(h: &Hypercomplex<T>) -> Result<FieldPoint<T>> {
    let tol = T::of(1e-12).max(T::epsilon() * T::of(64.0));
    let mut vals = [T::zero(); BASIS_LEN];
    for (slot, c) in h.coeffs.iter().enumerate() {
        let imaginary_slot = matches!(slot, 1..=4 | 11..=14);
        let (keep, stray) = if imaginary_slot { (c.im, c.re) } else { (c.re, c.im) };
        if stray.abs() > tol * c.norm() {
            return Err(Error::NonRealDecomposition { slot, imag: stray.f64() });
        }
        vals[slot] = keep;
    }
    Ok(FieldPoint {
        eps: vals[0],
        v0: vals[1],
        v: Vec3([-vals[2], -vals[3], -vals[4]]),
        e: Vec3([vals[5], vals[6], vals[7]]),
        cb: Vec3([-vals[8], -vals[9], -vals[10]]),
        u0: vals[11],
        u: Vec3([-vals[12], -vals[13], -vals[14]]),
        beta: vals[15],
    })
}

/// Evaluates `(iγ^ν∂_ν − κ)ψ` in the algebra and returns the sixteen real equation values,
/// slot by slot in basis order.
pub fn dirac_residual<T: Real>(jet: &FieldJet<T>, kappa: T) -> [T; BASIS_LEN] {
    let i = Complex::new(T::zero(), T::one());
    let mut r = compose_psi(&jet.value).scale(Complex::new(-kappa, T::zero()));
    for nu in 0..4 {
        let d_psi = compose_psi(jet.d(nu));
        r = r + multiply(&Hypercomplex::basis(1 + nu), &d_psi).scale(i);
    }
    let mut out = [T::zero(); BASIS_LEN];
    for (s, c) in r.coeffs.iter().enumerate() {
        out[s] = RESIDUAL_PHASES[s].inverse().apply(*c).re;
    }
    out
}

/// Totally antisymmetric symbol with `ε^{0123} = +1`.
pub fn levi_civita(idx: [usize; 4]) -> i32 {
    let mut p = idx;
    let mut sign = 1;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if p[i] == p[j] {
                return 0;
            }
            if p[i] > p[j] {
                p.swap(i, j);
                sign = -sign;
            }
        }
    }
    sign
}

/// Covariant components of the fields at one point.
struct Covariant<T> {
    eps: T,
    beta: T,
    v: [T; 4],
    u: [T; 4],
    f: [[T; 4]; 4],
}

fn covariant<T: Real>(p: &FieldPoint<T>) -> Covariant<T> {
    let z = T::zero();
    let (e, cb) = (p.e, p.cb);
    let f = [
        [z, e[0], e[1], e[2]],
        [-e[0], z, -cb[2], cb[1]],
        [-e[1], cb[2], z, -cb[0]],
        [-e[2], -cb[1], cb[0], z],
    ];
    Covariant {
        eps: p.eps,
        beta: p.beta,
        v: [p.v0, -p.v[0], -p.v[1], -p.v[2]],
        u: [p.u0, -p.u[0], -p.u[1], -p.u[2]],
        f,
    }
}

/// Antisymmetric index pairs of the bivector slots, in basis order.
pub const BIVECTOR_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2)];

/// Direct tensor evaluation of the sixteen covariant field equations, in the slot order of
/// [`dirac_residual`]: the `V` divergence, the four `ε` gradient equations, the six bivector
/// equations, the four `β` gradient equations, and the `U` divergence.
pub fn system_lhs_4d<T: Real>(jet: &FieldJet<T>, kappa: T) -> [T; BASIS_LEN] {
    let val = covariant(&jet.value);
    let d: [Covariant<T>; 4] = std::array::from_fn(|mu| covariant(jet.d(mu)));
    let eta = |a: usize| T::of(ETA[a] as f64);
    let half = T::half();
    let mut out = [T::zero(); BASIS_LEN];

    // ∂_ν V^ν + κε and ∂_ν U^ν + κβ
    out[0] = (0..4).fold(kappa * val.eps, |s, n| s + eta(n) * d[n].v[n]);
    out[15] = (0..4).fold(kappa * val.beta, |s, n| s + eta(n) * d[n].u[n]);

    for n in 0..4 {
        // ∂_ν ε − ∂_μ F_ν^μ − κV_ν
        let div_f = (0..4).fold(T::zero(), |s, m| s + eta(m) * d[m].f[n][m]);
        out[1 + n] = d[n].eps - div_f - kappa * val.v[n];

        // ∂_ν β + ½ η_{νν} ε^{νbcd} ∂_b F_{cd} − κU_ν
        let mut dual = T::zero();
        for b in 0..4 {
            for c in 0..4 {
                for dd in 0..4 {
                    let lc = levi_civita([n, b, c, dd]);
                    if lc != 0 {
                        dual = dual + T::of(lc as f64) * d[b].f[c][dd];
                    }
                }
            }
        }
        out[11 + n] = d[n].beta + half * eta(n) * dual - kappa * val.u[n];
    }

    for (slot, &(a, b)) in BIVECTOR_PAIRS.iter().enumerate() {
        // ∂_β V_α − ∂_α V_β + η^{αα}η^{ββ} ε^{αβcd} ∂_d U_c − κF_{αβ}
        let mut dual = T::zero();
        for c in 0..4 {
            for dd in 0..4 {
                let lc = levi_civita([a, b, c, dd]);
                if lc != 0 {
                    dual = dual + T::of(lc as f64) * d[dd].u[c];
                }
            }
        }
        out[5 + slot] =
            d[b].v[a] - d[a].v[b] + eta(a) * eta(b) * dual - kappa * val.f[a][b];
    }
    out
}
