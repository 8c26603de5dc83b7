//! Field, source and potential data model with pointwise residuals of the sourced
//! three-dimensional system and of the potential wave equations.

use crate::error::{Error, Result};
use crate::gamma::FieldJet;
use crate::scalar::Real;
use crate::vec3::Vec3;

/// Physical constants. Natural units set `c = ζ = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Units<T> {
    pub c: T,
    pub zeta: T,
    /// Compton wave number ϰ (inverse length).
    pub kappa: T,
}

impl<T: Real> Units<T> {
    pub fn natural() -> Self {
        Self { c: T::one(), zeta: T::one(), kappa: T::zero() }
    }

    pub fn new(c: T, zeta: T, kappa: T) -> Result<Self> {
        if !(c > T::zero() && c.is_finite()) {
            return Err(Error::config("units.c", "must be positive and finite"));
        }
        if !(zeta > T::zero() && zeta.is_finite()) {
            return Err(Error::config("units.zeta", "must be positive and finite"));
        }
        if !(kappa >= T::zero() && kappa.is_finite()) {
            return Err(Error::config("units.kappa", "must be non-negative and finite"));
        }
        Ok(Self { c, zeta, kappa })
    }

    pub fn with_kappa(self, kappa: T) -> Self {
        Self { kappa, ..self }
    }
}

impl<T: Real> Default for Units<T> {
    fn default() -> Self {
        Self::natural()
    }
}

/// The sixteen field components at one event.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldPoint<T> {
    pub eps: T,
    pub beta: T,
    pub e: Vec3<T>,
    pub cb: Vec3<T>,
    pub v0: T,
    pub v: Vec3<T>,
    pub u0: T,
    pub u: Vec3<T>,
}

/// Flat column order used by [`FieldPoint::to_array`] and CSV output.
pub const FIELD_COLUMNS: [&str; 16] = [
    "eps", "beta", "e_x", "e_y", "e_z", "cb_x", "cb_y", "cb_z", "v0", "v_x", "v_y", "v_z", "u0",
    "u_x", "u_y", "u_z",
];

impl<T: Real> FieldPoint<T> {
    pub fn zero() -> Self {
        Self::from_array([T::zero(); 16])
    }

    pub fn to_array(&self) -> [T; 16] {
        let (e, b, v, u) = (self.e.0, self.cb.0, self.v.0, self.u.0);
        [
            self.eps, self.beta, e[0], e[1], e[2], b[0], b[1], b[2], self.v0, v[0], v[1], v[2],
            self.u0, u[0], u[1], u[2],
        ]
    }

    pub fn from_array(a: [T; 16]) -> Self {
        Self {
            eps: a[0],
            beta: a[1],
            e: Vec3([a[2], a[3], a[4]]),
            cb: Vec3([a[5], a[6], a[7]]),
            v0: a[8],
            v: Vec3([a[9], a[10], a[11]]),
            u0: a[12],
            u: Vec3([a[13], a[14], a[15]]),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> T {
        self.to_array().iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_array(self.to_array().map(|x| x * s))
    }

    pub fn add(&self, o: &Self) -> Self {
        let (a, b) = (self.to_array(), o.to_array());
        Self::from_array(std::array::from_fn(|i| a[i] + b[i]))
    }
}

/// The sixteen source components at one event.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SourcePoint<T> {
    pub rho_e: T,
    pub j_e: Vec3<T>,
    pub rho_m: T,
    pub j_m: Vec3<T>,
    pub s: T,
    pub k: Vec3<T>,
    pub l: Vec3<T>,
    pub p: T,
}

pub const SOURCE_COLUMNS: [&str; 16] = [
    "rho_e", "j_e_x", "j_e_y", "j_e_z", "rho_m", "j_m_x", "j_m_y", "j_m_z", "s", "k_x", "k_y",
    "k_z", "l_x", "l_y", "l_z", "p",
];

impl<T: Real> SourcePoint<T> {
    pub fn zero() -> Self {
        Self::from_array([T::zero(); 16])
    }

    pub fn to_array(&self) -> [T; 16] {
        let (je, jm, k, l) = (self.j_e.0, self.j_m.0, self.k.0, self.l.0);
        [
            self.rho_e, je[0], je[1], je[2], self.rho_m, jm[0], jm[1], jm[2], self.s, k[0], k[1],
            k[2], l[0], l[1], l[2], self.p,
        ]
    }

    pub fn from_array(a: [T; 16]) -> Self {
        Self {
            rho_e: a[0],
            j_e: Vec3([a[1], a[2], a[3]]),
            rho_m: a[4],
            j_m: Vec3([a[5], a[6], a[7]]),
            s: a[8],
            k: Vec3([a[9], a[10], a[11]]),
            l: Vec3([a[12], a[13], a[14]]),
            p: a[15],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

/// The sixteen potential components at one event.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PotentialPoint<T> {
    pub phi: T,
    pub ca: Vec3<T>,
    pub pi0: T,
    pub pi: Vec3<T>,
    pub s: T,
    pub theta: Vec3<T>,
    pub psi: T,
    pub vartheta: Vec3<T>,
}

pub const POTENTIAL_COLUMNS: [&str; 16] = [
    "phi", "ca_x", "ca_y", "ca_z", "pi0", "pi_x", "pi_y", "pi_z", "s", "theta_x", "theta_y",
    "theta_z", "psi", "vartheta_x", "vartheta_y", "vartheta_z",
];

impl<T: Real> PotentialPoint<T> {
    pub fn zero() -> Self {
        Self::from_array([T::zero(); 16])
    }

    pub fn to_array(&self) -> [T; 16] {
        let (a, p, th, vt) = (self.ca.0, self.pi.0, self.theta.0, self.vartheta.0);
        [
            self.phi, a[0], a[1], a[2], self.pi0, p[0], p[1], p[2], self.s, th[0], th[1], th[2],
            self.psi, vt[0], vt[1], vt[2],
        ]
    }

    pub fn from_array(a: [T; 16]) -> Self {
        Self {
            phi: a[0],
            ca: Vec3([a[1], a[2], a[3]]),
            pi0: a[4],
            pi: Vec3([a[5], a[6], a[7]]),
            s: a[8],
            theta: Vec3([a[9], a[10], a[11]]),
            psi: a[12],
            vartheta: Vec3([a[13], a[14], a[15]]),
        }
    }
}

/// Potentials with first derivatives (`d[0]` per unit `c·t`).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PotentialJet<T> {
    pub value: PotentialPoint<T>,
    pub d: [PotentialPoint<T>; 4],
}

/// Potentials with first and second derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PotentialJet2<T> {
    pub value: PotentialPoint<T>,
    pub d: [PotentialPoint<T>; 4],
    pub d2: [[PotentialPoint<T>; 4]; 4],
}

impl<T: Real> PotentialJet2<T> {
    pub fn first_order(&self) -> PotentialJet<T> {
        PotentialJet { value: self.value, d: self.d }
    }

    /// Field jet generated by these potentials.
    pub fn field_jet(&self, u: &Units<T>) -> FieldJet<T> {
        let value = fields_from_potentials(&self.first_order(), u);
        let deriv = |mu: usize| {
            fields_from_potentials(&PotentialJet { value: self.d[mu], d: self.d2[mu] }, u)
        };
        FieldJet { value, dt: deriv(0), grad: [deriv(1), deriv(2), deriv(3)] }
    }
}

/// Spatial derivative operators on a jet, for a field selected by `sel`.
fn grad<T: Real>(jet: &FieldJet<T>, sel: impl Fn(&FieldPoint<T>) -> T) -> Vec3<T> {
    Vec3([sel(&jet.grad[0]), sel(&jet.grad[1]), sel(&jet.grad[2])])
}

fn div<T: Real>(jet: &FieldJet<T>, sel: impl Fn(&FieldPoint<T>) -> Vec3<T>) -> T {
    sel(&jet.grad[0])[0] + sel(&jet.grad[1])[1] + sel(&jet.grad[2])[2]
}

fn curl<T: Real>(jet: &FieldJet<T>, sel: impl Fn(&FieldPoint<T>) -> Vec3<T>) -> Vec3<T> {
    let d = |j: usize, i: usize| sel(&jet.grad[j])[i];
    Vec3([d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0)])
}

/// Residual order: ε equation, E (x, y, z), β equation, cB (x, y, z), V⁰, V (x, y, z),
/// U (x, y, z), U⁰.
pub const SYSTEM_COLUMNS: [&str; 16] = [
    "eps", "e_x", "e_y", "e_z", "beta", "cb_x", "cb_y", "cb_z", "v0", "v_x", "v_y", "v_z",
    "u_x", "u_y", "u_z", "u0",
];

/// Position of each [`system_residual`] entry among the covariant slots of
/// [`crate::gamma::system_lhs_4d`], with the sign relating them.
pub const SYSTEM_TO_4D: [(usize, i8); 16] = [
    (1, 1),
    (2, 1),
    (3, 1),
    (4, 1),
    (11, -1),
    (12, -1),
    (13, -1),
    (14, -1),
    (0, 1),
    (5, 1),
    (6, 1),
    (7, 1),
    (8, 1),
    (9, 1),
    (10, 1),
    (15, 1),
];

/// Left side minus right side of each equation of the sourced system.
pub fn system_residual<T: Real>(jet: &FieldJet<T>, src: &SourcePoint<T>, u: &Units<T>) -> [T; 16] {
    let f = &jet.value;
    let dt = &jet.dt;
    let (k, z, c) = (u.kappa, u.zeta, u.c);

    let r8 = dt.eps + div(jet, |p| p.e) - k * f.v0 - z * c * src.rho_e;
    let r9 = dt.e - curl(jet, |p| p.cb) + grad(jet, |p| p.eps) + f.v * k + src.j_e * z;
    let r10 = -dt.beta + div(jet, |p| p.cb) + k * f.u0 + z * c * src.rho_m;
    let r11 = dt.cb + curl(jet, |p| p.e) - grad(jet, |p| p.beta) - f.u * k - src.j_m * z;
    let r12 = dt.v0 + div(jet, |p| p.v) + k * f.eps - z * src.s;
    let r13 = dt.v - curl(jet, |p| p.u) + grad(jet, |p| p.v0) - f.e * k + src.k * z;
    let r14 = dt.u + curl(jet, |p| p.v) + grad(jet, |p| p.u0) + f.cb * k - src.l * z;
    let r15 = dt.u0 + div(jet, |p| p.u) + k * f.beta + z * src.p;

    [
        r8, r9[0], r9[1], r9[2], r10, r11[0], r11[1], r11[2], r12, r13[0], r13[1], r13[2],
        r14[0], r14[1], r14[2], r15,
    ]
}

/// Sources that make `jet` an exact solution of the sourced system.
pub fn manufactured_sources<T: Real>(jet: &FieldJet<T>, u: &Units<T>) -> SourcePoint<T> {
    let r = system_residual(jet, &SourcePoint::zero(), u);
    let (z, zc) = (u.zeta, u.zeta * u.c);
    SourcePoint {
        rho_e: r[0] / zc,
        j_e: Vec3([-r[1] / z, -r[2] / z, -r[3] / z]),
        rho_m: -r[4] / zc,
        j_m: Vec3([r[5] / z, r[6] / z, r[7] / z]),
        s: r[8] / z,
        k: Vec3([-r[9] / z, -r[10] / z, -r[11] / z]),
        l: Vec3([r[12] / z, r[13] / z, r[14] / z]),
        p: -r[15] / z,
    }
}

fn p_grad<T: Real>(pj: &PotentialJet<T>, sel: impl Fn(&PotentialPoint<T>) -> T) -> Vec3<T> {
    Vec3([sel(&pj.d[1]), sel(&pj.d[2]), sel(&pj.d[3])])
}

fn p_div<T: Real>(pj: &PotentialJet<T>, sel: impl Fn(&PotentialPoint<T>) -> Vec3<T>) -> T {
    sel(&pj.d[1])[0] + sel(&pj.d[2])[1] + sel(&pj.d[3])[2]
}

fn p_curl<T: Real>(pj: &PotentialJet<T>, sel: impl Fn(&PotentialPoint<T>) -> Vec3<T>) -> Vec3<T> {
    let d = |j: usize, i: usize| sel(&pj.d[j + 1])[i];
    Vec3([d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0)])
}

/// Fields defined by the potentials.
pub fn fields_from_potentials<T: Real>(pj: &PotentialJet<T>, u: &Units<T>) -> FieldPoint<T> {
    let p = &pj.value;
    let d0 = &pj.d[0];
    let k = u.kappa;
    FieldPoint {
        eps: d0.phi + p_div(pj, |q| q.ca) + k * p.s,
        e: -d0.ca - p_grad(pj, |q| q.phi) + p_curl(pj, |q| q.pi) + p.theta * k,
        cb: d0.pi + p_grad(pj, |q| q.pi0) + p_curl(pj, |q| q.ca) + p.vartheta * k,
        beta: d0.pi0 + p_div(pj, |q| q.pi) - k * p.psi,
        v0: d0.s + p_div(pj, |q| q.theta) - k * p.phi,
        v: -d0.theta + p_curl(pj, |q| q.vartheta) - p_grad(pj, |q| q.s) - p.ca * k,
        u0: -d0.psi - p_div(pj, |q| q.vartheta) - k * p.pi0,
        u: d0.vartheta + p_curl(pj, |q| q.theta) + p_grad(pj, |q| q.psi) - p.pi * k,
    }
}

/// `□X + ϰ²X − ζ·source` for every potential component, in [`POTENTIAL_COLUMNS`] order.
pub fn potential_wave_residual<T: Real>(
    pj: &PotentialJet2<T>,
    src: &SourcePoint<T>,
    u: &Units<T>,
) -> [T; 16] {
    let val = pj.value.to_array();
    let tt = pj.d2[0][0].to_array();
    let xx = pj.d2[1][1].to_array();
    let yy = pj.d2[2][2].to_array();
    let zz = pj.d2[3][3].to_array();
    let (z, c) = (u.zeta, u.c);
    let rhs = PotentialPoint {
        phi: z * c * src.rho_e,
        ca: src.j_e * z,
        pi0: z * c * src.rho_m,
        pi: src.j_m * z,
        s: z * src.s,
        theta: src.k * z,
        psi: z * src.p,
        vartheta: src.l * z,
    }
    .to_array();
    let k2 = u.kappa * u.kappa;
    std::array::from_fn(|i| tt[i] - xx[i] - yy[i] - zz[i] + k2 * val[i] - rhs[i])
}

/// Right side of the ε wave equation, `ζ(∂ρ/∂t + ∇·j)`.
pub fn epsilon_source<T: Real>(drho_dt: T, div_j: T, u: &Units<T>) -> T {
    u.zeta * (drho_dt + div_j)
}

fn check_plane_wave<T: Real>(omega: T, khat: &Vec3<T>) -> Result<()> {
    if !(omega > T::zero() && omega.is_finite()) {
        return Err(Error::Domain("plane wave needs omega > 0".into()));
    }
    let tol = T::of(1e-12).max(T::epsilon() * T::of(16.0));
    if (khat.norm() - T::one()).abs() > tol {
        return Err(Error::Domain("plane wave direction must be a unit vector".into()));
    }
    Ok(())
}

/// Longitudinal ε–E plane wave: ε = ε₀cos(ωt − k·r), E = k̂ε₀cos(ωt − k·r), no magnetic field.
pub fn plane_wave<T: Real>(
    eps0: T,
    omega: T,
    khat: Vec3<T>,
    t: T,
    r: Vec3<T>,
    u: &Units<T>,
) -> Result<FieldPoint<T>> {
    check_plane_wave(omega, &khat)?;
    let k = khat * (omega / u.c);
    let amp = eps0 * (omega * t - k.dot(&r)).cos();
    Ok(FieldPoint { eps: amp, e: khat * (amp * k.norm() * u.c / omega), ..FieldPoint::zero() })
}

/// Plane wave together with its exact first derivatives.
pub fn plane_wave_jet<T: Real>(
    eps0: T,
    omega: T,
    khat: Vec3<T>,
    t: T,
    r: Vec3<T>,
    u: &Units<T>,
) -> Result<FieldJet<T>> {
    let value = plane_wave(eps0, omega, khat, t, r, u)?;
    let k = khat * (omega / u.c);
    let s = eps0 * (omega * t - k.dot(&r)).sin();
    let shape = |amp: T| FieldPoint { eps: amp, e: khat * amp, ..FieldPoint::zero() };
    Ok(FieldJet {
        value,
        dt: shape(-s * omega / u.c),
        grad: [shape(s * k[0]), shape(s * k[1]), shape(s * k[2])],
    })
}
