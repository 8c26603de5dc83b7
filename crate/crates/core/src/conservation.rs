//! Energy and momentum bookkeeping for the full sixteen-field system and for its massless
//! (ε, E, B) subsystem, plus discrete balance checks on radial solver output.
//!
//! The momentum law is written `∂g/∂t + f = ∂ⱼTⁱʲ`, with the divergence on the second index.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{system_residual, FieldPoint, SourcePoint, Units};
use crate::gamma::FieldJet;
use crate::scalar::Real;
use crate::solver::radial::ShellSample;
use crate::vec3::Vec3;

pub type Tensor3<T> = [[T; 3]; 3];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyMomentumSample<T> {
    pub energy_density: T,
    pub energy_flux: Vec3<T>,
    pub momentum_density: Vec3<T>,
    /// `stress[i][j] = Tⁱʲ`.
    pub stress: Tensor3<T>,
    pub interaction_power: T,
    pub interaction_force: Vec3<T>,
}

/// `(density, interaction power, flux)`.
pub fn energy_law_terms<T: Real>(f: &FieldPoint<T>, src: &SourcePoint<T>, u: &Units<T>) -> (T, T, Vec3<T>) {
    let (z, c) = (u.zeta, u.c);
    let sq = f.e.norm2()
        + f.cb.norm2()
        + f.eps * f.eps
        + f.beta * f.beta
        + f.v.norm2()
        + f.u.norm2()
        + f.v0 * f.v0
        + f.u0 * f.u0;
    let density = sq / (T::two() * z * c);
    let power = f.e.dot(&src.j_e) - f.eps * c * src.rho_e - f.cb.dot(&src.j_m) - f.beta * c * src.rho_m
        + f.v.dot(&src.k)
        - f.u.dot(&src.l)
        - f.v0 * src.s
        + f.u0 * src.p;
    let flux = (f.e.cross(&f.cb) + f.e * f.eps - f.cb * f.beta + f.v * f.v0 + f.u * f.u0 + f.v.cross(&f.u))
        * (T::one() / z);
    (density, power, flux)
}

fn energy_density<T: Real>(f: &FieldPoint<T>, u: &Units<T>) -> T {
    energy_law_terms(f, &SourcePoint::zero(), u).0
}

fn energy_flux<T: Real>(f: &FieldPoint<T>, u: &Units<T>) -> Vec3<T> {
    energy_law_terms(f, &SourcePoint::zero(), u).2
}

fn momentum_density<T: Real>(f: &FieldPoint<T>, u: &Units<T>) -> Vec3<T> {
    (f.e.cross(&f.cb) - f.e * f.eps + f.cb * f.beta + f.u.cross(&f.v) + f.v * f.v0 + f.u * f.u0)
        * (T::one() / (u.zeta * u.c * u.c))
}

fn stress<T: Real>(f: &FieldPoint<T>, u: &Units<T>) -> Tensor3<T> {
    let s = T::one() / (u.zeta * u.c);
    let em_trace = (f.e.norm2() + f.cb.norm2() - f.eps * f.eps - f.beta * f.beta) * T::half();
    let vu_trace = (f.v.norm2() + f.u.norm2() - f.v0 * f.v0 - f.u0 * f.u0) * T::half();
    let em_axial = f.e * f.beta + f.cb * f.eps;
    let vu_axial = f.v * f.u0 - f.u * f.v0;
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut em = f.e[i] * f.e[j] + f.cb[i] * f.cb[j];
            let mut vu = f.v[i] * f.v[j] + f.u[i] * f.u[j];
            if i == j {
                em = em - em_trace;
                vu = vu - vu_trace;
            } else {
                let k = 3 - i - j;
                let sign = if (i + 1) % 3 == j { T::one() } else { -T::one() };
                em = em - sign * em_axial[k];
                vu = vu + sign * vu_axial[k];
            }
            (em - vu) * s
        })
    })
}

/// `(momentum density, force density, stress)`.
pub fn momentum_law_terms<T: Real>(
    f: &FieldPoint<T>,
    src: &SourcePoint<T>,
    u: &Units<T>,
) -> (Vec3<T>, Vec3<T>, Tensor3<T>) {
    let c = u.c;
    let inv_c = T::one() / c;
    let em = f.e * (c * src.rho_e) + src.j_e.cross(&f.cb) - f.cb * (c * src.rho_m) + src.j_m.cross(&f.e)
        - src.j_e * f.eps
        - src.j_m * f.beta;
    let vu = f.u * src.p - f.v * src.s + src.k * f.v0 - src.l * f.u0 + f.u.cross(&src.k) + f.v.cross(&src.l);
    (momentum_density(f, u), (em + vu) * inv_c, stress(f, u))
}

pub fn sample<T: Real>(f: &FieldPoint<T>, src: &SourcePoint<T>, u: &Units<T>) -> EnergyMomentumSample<T> {
    let (energy_density, interaction_power, energy_flux) = energy_law_terms(f, src, u);
    let (momentum_density, interaction_force, stress) = momentum_law_terms(f, src, u);
    EnergyMomentumSample {
        energy_density,
        energy_flux,
        momentum_density,
        stress,
        interaction_power,
        interaction_force,
    }
}

/// Directional derivative of a quadratic quantity `q` along `h`, by polarization.
fn polar<T: Real, Q>(q: impl Fn(&FieldPoint<T>) -> Q, f: &FieldPoint<T>, h: &FieldPoint<T>) -> Q
where
    Q: std::ops::Sub<Output = Q>,
{
    q(&f.add(h)) - q(f) - q(h)
}

fn tensor_sub<T: Real>(a: Tensor3<T>, b: Tensor3<T>) -> Tensor3<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] - b[i][j]))
}

/// Left minus right side of the energy law `∂u/∂t + P + ∇·S = 0` and the momentum law
/// `∂g/∂t + f − ∂ⱼTⁱʲ = 0`, evaluated from the jet.
pub fn divergence_identity_residual<T: Real>(
    jet: &FieldJet<T>,
    src: &SourcePoint<T>,
    u: &Units<T>,
) -> (T, Vec3<T>) {
    let f = &jet.value;
    let c = u.c;
    let (_, power, _) = energy_law_terms(f, src, u);
    let mut energy = c * polar(|p| energy_density(p, u), f, &jet.dt) + power;
    for j in 0..3 {
        energy = energy + polar(|p| energy_flux(p, u), f, &jet.grad[j])[j];
    }
    let (_, force, _) = momentum_law_terms(f, src, u);
    let mut momentum = polar(|p| momentum_density(p, u), f, &jet.dt) * c + force;
    for j in 0..3 {
        let dt_ij = polar_tensor(|p| stress(p, u), f, &jet.grad[j]);
        momentum = momentum - Vec3::new(dt_ij[0][j], dt_ij[1][j], dt_ij[2][j]);
    }
    (energy, momentum)
}

fn polar_tensor<T: Real>(q: impl Fn(&FieldPoint<T>) -> Tensor3<T>, f: &FieldPoint<T>, h: &FieldPoint<T>) -> Tensor3<T> {
    tensor_sub(tensor_sub(q(&f.add(h)), q(f)), q(h))
}

/// The energy and momentum residuals written as contractions of the field-equation
/// residuals with the field values. Coded independently of [`divergence_identity_residual`].
pub fn residual_contraction<T: Real>(jet: &FieldJet<T>, src: &SourcePoint<T>, u: &Units<T>) -> (T, Vec3<T>) {
    let r = system_residual(jet, src, u);
    let f = &jet.value;
    let v3 = |i: usize| Vec3::new(r[i], r[i + 1], r[i + 2]);
    let (r8, r9, r10, r11, r12, r13, r14, r15) = (r[0], v3(1), r[4], v3(5), r[8], v3(9), v3(12), r[15]);
    let energy = (f.eps * r8 + f.e.dot(&r9) - f.beta * r10 + f.cb.dot(&r11) + f.v0 * r12 + f.v.dot(&r13)
        + f.u.dot(&r14)
        + f.u0 * r15)
        / u.zeta;
    let m = f.e * r8 + f.cb.cross(&r9) + f.cb * r10 - f.e.cross(&r11) + r9 * f.eps - r11 * f.beta
        + f.v.cross(&r14)
        - f.u.cross(&r13)
        - f.v * r12
        - r13 * f.v0
        - r14 * f.u0
        - f.u * r15;
    (energy, m * (-T::one() / (u.c * u.zeta)))
}

/// Energy terms of the massless (ε, E, B) subsystem with electric sources only.
pub fn subsystem_energy_terms<T: Real>(
    eps: T,
    e: Vec3<T>,
    cb: Vec3<T>,
    rho: T,
    j: Vec3<T>,
    u: &Units<T>,
) -> (T, T, Vec3<T>) {
    let density = (e.norm2() + cb.norm2() + eps * eps) / (T::two() * u.zeta * u.c);
    let power = e.dot(&j) - eps * u.c * rho;
    let flux = (e.cross(&cb) + e * eps) * (T::one() / u.zeta);
    (density, power, flux)
}

/// Momentum terms of the massless subsystem: `(g, f, T)`.
pub fn subsystem_momentum_terms<T: Real>(
    eps: T,
    e: Vec3<T>,
    cb: Vec3<T>,
    rho: T,
    j: Vec3<T>,
    u: &Units<T>,
) -> (Vec3<T>, Vec3<T>, Tensor3<T>) {
    let g = (e.cross(&cb) - e * eps) * (T::one() / (u.zeta * u.c * u.c));
    let force = (e * (u.c * rho) + j.cross(&cb) - j * eps) * (T::one() / u.c);
    let half_trace = (e.norm2() + cb.norm2() - eps * eps) * T::half();
    let t = std::array::from_fn(|i| {
        std::array::from_fn(|jj| {
            let mut v = e[i] * e[jj] + cb[i] * cb[jj];
            if i == jj {
                v = v - half_trace;
            } else {
                let k = 3 - i - jj;
                let sign = if (i + 1) % 3 == jj { T::one() } else { -T::one() };
                v = v - sign * eps * cb[k];
            }
            v / (u.zeta * u.c)
        })
    });
    (g, force, t)
}

/// Per-step energy bookkeeping inside a control volume.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergySample<T> {
    pub t: T,
    /// Field energy inside the volume.
    pub field_energy: T,
    /// Power delivered to the field by charges inside, `∫εcρ dV`.
    pub source_power: T,
    /// Power entering through the inner boundary, if the volume has one.
    pub inflow: T,
    /// Power leaving through the outer boundary.
    pub outflow: T,
}

impl<T: Real> From<&ShellSample<T>> for EnergySample<T> {
    fn from(s: &ShellSample<T>) -> Self {
        Self {
            t: s.t,
            field_energy: s.field_energy,
            source_power: s.shell_power,
            inflow: s.inner_flux,
            outflow: s.outer_flux,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceReport<T> {
    /// `(t_mid, residual)` per step, with
    /// residual `= ΔW/Δt − ½(Pₙ + Pₙ₊₁) − ½(Iₙ + Iₙ₊₁) + ½(Fₙ + Fₙ₊₁)` for source power `P`,
    /// inflow `I` and outflow `F`.
    pub residuals: Vec<(T, T)>,
    pub max_abs: T,
    /// Root mean square of the per-step residual.
    pub rms: T,
    /// `W_end − W_start`.
    pub energy_change: T,
    /// Time integral of the source power.
    pub source_work: T,
    /// Time integral of the inflow.
    pub inflow_work: T,
    /// Time integral of the outflow.
    pub outflow_work: T,
    /// `energy_change − source_work − inflow_work + outflow_work`.
    pub ledger_residual: T,
}

/// Discrete energy balance over uniformly spaced samples: finite difference in time for the
/// stored energy, trapezoid for the power terms.
pub fn discrete_balance<T: Real>(samples: &[EnergySample<T>]) -> Result<BalanceReport<T>> {
    if samples.len() < 2 {
        return Err(Error::GridMismatch("need at least two samples".into()));
    }
    let dt = samples[1].t - samples[0].t;
    if !(dt > T::zero()) {
        return Err(Error::GridMismatch("sample times must increase".into()));
    }
    let tol = dt * T::of(1e-6);
    let mut residuals = Vec::with_capacity(samples.len() - 1);
    let (mut source_work, mut inflow_work, mut outflow_work) = (T::zero(), T::zero(), T::zero());
    for w in samples.windows(2) {
        let h = w[1].t - w[0].t;
        if (h - dt).abs() > tol {
            return Err(Error::GridMismatch(format!(
                "non-uniform sampling: step {:e} where {:e} was expected",
                h.f64(),
                dt.f64()
            )));
        }
        let p = (w[0].source_power + w[1].source_power) * T::half();
        let fi = (w[0].inflow + w[1].inflow) * T::half();
        let fo = (w[0].outflow + w[1].outflow) * T::half();
        source_work = source_work + p * h;
        inflow_work = inflow_work + fi * h;
        outflow_work = outflow_work + fo * h;
        let r = (w[1].field_energy - w[0].field_energy) / h - p - fi + fo;
        residuals.push(((w[0].t + w[1].t) * T::half(), r));
    }
    let max_abs = residuals.iter().fold(T::zero(), |m, r| m.max(r.1.abs()));
    let rms = (residuals.iter().fold(T::zero(), |s, r| s + r.1 * r.1) / T::of(residuals.len() as f64)).sqrt();
    let energy_change = samples[samples.len() - 1].field_energy - samples[0].field_energy;
    Ok(BalanceReport {
        residuals,
        max_abs,
        rms,
        energy_change,
        source_work,
        inflow_work,
        outflow_work,
        ledger_residual: energy_change - source_work - inflow_work + outflow_work,
    })
}
