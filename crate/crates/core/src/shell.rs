//! Closed forms for a thin spherical shell whose charge grows or decays exponentially,
//! in the external region `r ≥ r₀`: potentials, ε and radial E, radiated energy, and the
//! energy ledgers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Units;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChargeMode {
    /// `q = q₀(1 − e^{−t/τ})` for `t > 0`, zero before.
    Growth,
    /// `q = q₀e^{−t/τ}` for `t > 0`, `q₀` before.
    Decay,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShellSpec<T> {
    pub q0: T,
    pub r0: T,
    pub tau: T,
    pub mode: ChargeMode,
}

impl<T: Real> ShellSpec<T> {
    pub fn new(q0: T, r0: T, tau: T, mode: ChargeMode) -> Result<Self> {
        if !q0.is_finite() {
            return Err(Error::config("shell.q0", "must be finite"));
        }
        if !(r0 > T::zero() && r0.is_finite()) {
            return Err(Error::config("shell.r0", "must be positive and finite"));
        }
        if !(tau > T::zero()) || tau.is_nan() {
            return Err(Error::config("shell.tau", "must be positive"));
        }
        Ok(Self { q0, r0, tau, mode })
    }

    pub fn with_mode(self, mode: ChargeMode) -> Self {
        Self { mode, ..self }
    }
}

/// Shell charge at time `t`.
pub fn charge<T: Real>(t: T, spec: &ShellSpec<T>) -> T {
    match spec.mode {
        ChargeMode::Growth if t <= T::zero() => T::zero(),
        ChargeMode::Growth => -spec.q0 * (-t / spec.tau).exp_m1(),
        ChargeMode::Decay if t <= T::zero() => spec.q0,
        ChargeMode::Decay => spec.q0 * (-t / spec.tau).exp(),
    }
}

/// `dq/dt`.
pub fn charge_rate<T: Real>(t: T, spec: &ShellSpec<T>) -> T {
    if t <= T::zero() {
        return T::zero();
    }
    let r = spec.q0 / spec.tau * (-t / spec.tau).exp();
    match spec.mode {
        ChargeMode::Growth => r,
        ChargeMode::Decay => -r,
    }
}

/// `x − 1 + e^{−x}` without cancellation for small `x ≥ 0`.
pub fn exp_ramp<T: Real>(x: T) -> T {
    if x < T::half() {
        // Alternating series Σ_{n≥2} (−x)ⁿ/n!
        let mut term = x * x * T::half();
        let mut sum = T::zero();
        for n in 3..40 {
            sum = sum + term;
            term = -term * x / T::of(n as f64);
            if term.abs() <= T::epsilon() * sum.abs() {
                break;
            }
        }
        sum + term
    } else {
        x + (-x).exp_m1()
    }
}

fn check_external<T: Real>(r: T, spec: &ShellSpec<T>) -> Result<()> {
    if r < spec.r0 || r.is_nan() {
        return Err(Error::Domain(format!(
            "radius {:e} lies inside the shell radius {:e}",
            r.f64(),
            spec.r0.f64()
        )));
    }
    Ok(())
}

/// Common prefactor `ζcq₀/(8πrr₀)`.
fn prefactor<T: Real>(r: T, spec: &ShellSpec<T>, u: &Units<T>) -> T {
    u.zeta * u.c * spec.q0 / (T::eight_pi() * r * spec.r0)
}

/// Retarded potential `φ(r, t)`.
pub fn potential<T: Real>(r: T, t: T, spec: &ShellSpec<T>, u: &Units<T>) -> Result<T> {
    check_external(r, spec)?;
    let k = prefactor(r, spec, u);
    let ctau = u.c * spec.tau;
    let two_r0 = T::two() * spec.r0;
    // Time since the front from the near side of the shell arrived, as a length.
    let s = u.c * t - (r - spec.r0);
    let tail = || ctau * (-(s - two_r0) / ctau).exp() * -(-two_r0 / ctau).exp_m1();
    let growth = if s <= T::zero() {
        T::zero()
    } else if s <= two_r0 {
        ctau * exp_ramp(s / ctau)
    } else {
        two_r0 - tail()
    };
    Ok(k * match spec.mode {
        ChargeMode::Growth => growth,
        ChargeMode::Decay if s <= T::zero() => two_r0,
        ChargeMode::Decay if s <= two_r0 => two_r0 - ctau * exp_ramp(s / ctau),
        ChargeMode::Decay => tail(),
    })
}

/// `ε(r, t)`; the decaying shell's value is the negated growth value.
pub fn epsilon_field<T: Real>(r: T, t: T, spec: &ShellSpec<T>, u: &Units<T>) -> Result<T> {
    check_external(r, spec)?;
    let k = prefactor(r, spec, u);
    let ctau = u.c * spec.tau;
    let two_r0 = T::two() * spec.r0;
    let s = u.c * t - (r - spec.r0);
    let growth = if s <= T::zero() {
        T::zero()
    } else if s <= two_r0 {
        -(-s / ctau).exp_m1()
    } else {
        (-(s - two_r0) / ctau).exp() * -(-two_r0 / ctau).exp_m1()
    };
    Ok(match spec.mode {
        ChargeMode::Growth => k * growth,
        ChargeMode::Decay => -k * growth,
    })
}

/// Radial electric field `E_r = ε + φ/r`.
pub fn radial_e<T: Real>(r: T, t: T, spec: &ShellSpec<T>, u: &Units<T>) -> Result<T> {
    Ok(epsilon_field(r, t, spec, u)? + potential(r, t, spec, u)? / r)
}

/// Static Coulomb potential `ζcq/(4πr)`.
pub fn coulomb_potential<T: Real>(q: T, r: T, u: &Units<T>) -> T {
    u.zeta * u.c * q / (T::four_pi() * r)
}

/// `(ζcq₀²/8πr₀)·[1 − (cτ/2r₀)(1 − e^{−2r₀/cτ})]`, the part of the flux that escapes to infinity.
fn escaping_energy<T: Real>(spec: &ShellSpec<T>, u: &Units<T>) -> T {
    let x = T::two() * spec.r0 / (u.c * spec.tau);
    let base = u.zeta * u.c * spec.q0 * spec.q0 / (T::eight_pi() * spec.r0);
    if x == T::zero() {
        return T::zero();
    }
    base * exp_ramp(x) / x
}

/// Energy that flows through the sphere of radius `R` over the whole transient.
/// `R` may be infinite.
pub fn radiated_energy<T: Real>(big_r: T, spec: &ShellSpec<T>, u: &Units<T>) -> Result<T> {
    check_external(big_r, spec)?;
    let coulomb_tail = u.zeta * u.c * spec.q0 * spec.q0 / (T::eight_pi() * big_r);
    let w = escaping_energy(spec, u);
    Ok(match spec.mode {
        ChargeMode::Growth => w + coulomb_tail,
        ChargeMode::Decay => w - coulomb_tail,
    })
}

/// Rest energy given up by the shell while its charge grows (`−Δmc²`), or taken up while it
/// decays (`+Δmc²`). Both are non-negative.
pub fn rest_energy_change<T: Real>(spec: &ShellSpec<T>, u: &Units<T>) -> T {
    let base = u.zeta * u.c * spec.q0 * spec.q0 / (T::eight_pi() * spec.r0);
    match spec.mode {
        ChargeMode::Growth => base + escaping_energy(spec, u),
        ChargeMode::Decay => {
            let x = T::two() * spec.r0 / (u.c * spec.tau);
            if x == T::zero() {
                base
            } else {
                base * -(-x).exp_m1() / x
            }
        }
    }
}

/// Field energy of a charge `q` between two radii, `ζcq²/(8π)·(1/r_inner − 1/r_outer)`.
pub fn coulomb_energy<T: Real>(q: T, r_inner: T, r_outer: T, u: &Units<T>) -> Result<T> {
    if !(r_inner > T::zero() && r_outer >= r_inner) {
        return Err(Error::Domain(format!(
            "coulomb energy needs 0 < r_inner <= r_outer, got {:e}, {:e}",
            r_inner.f64(),
            r_outer.f64()
        )));
    }
    Ok(u.zeta * u.c * q * q / T::eight_pi() * (T::one() / r_inner - T::one() / r_outer))
}

/// Time-integrated energy balance of a growing or decaying shell, seen through radius `R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyLedger<T> {
    pub mode: ChargeMode,
    /// `−Δmc²` for growth, `+Δmc²` for decay.
    pub delta_rest_energy: T,
    /// Coulomb-field energy between `r₀` and `R` created (growth) or destroyed (decay).
    pub w_coul: T,
    /// Energy carried through `R`.
    pub w_rad: T,
    /// Growth: `−Δmc² − (W_Coul + W_rad)`. Decay: `W_Coul − (Δmc² + W_rad)`.
    pub residual: T,
}

impl<T: Real> EnergyLedger<T> {
    pub fn scale(&self) -> T {
        self.delta_rest_energy.abs().max(self.w_coul.abs()).max(self.w_rad.abs())
    }

    pub fn relative_residual(&self) -> T {
        let s = self.scale();
        if s == T::zero() {
            self.residual.abs()
        } else {
            self.residual.abs() / s
        }
    }
}

pub fn balance_ledger<T: Real>(
    spec: &ShellSpec<T>,
    big_r: T,
    u: &Units<T>,
) -> Result<EnergyLedger<T>> {
    check_external(big_r, spec)?;
    let delta_rest_energy = rest_energy_change(spec, u);
    let w_coul = coulomb_energy(spec.q0, spec.r0, big_r, u)?;
    let w_rad = radiated_energy(big_r, spec, u)?;
    let residual = match spec.mode {
        ChargeMode::Growth => delta_rest_energy - (w_coul + w_rad),
        ChargeMode::Decay => w_coul - (delta_rest_energy + w_rad),
    };
    Ok(EnergyLedger { mode: spec.mode, delta_rest_energy, w_coul, w_rad, residual })
}

/// Non-field mass `m_e` of a charge born from primary mass `m₀`, and the total mass
/// `m_e + W_Coul/c²`, with the ledger taken to infinity.
pub fn renormalization_masses<T: Real>(m0: T, spec: &ShellSpec<T>, u: &Units<T>) -> (T, T) {
    let c2 = u.c * u.c;
    let w_coul = u.zeta * u.c * spec.q0 * spec.q0 / (T::eight_pi() * spec.r0);
    let w_rad = escaping_energy(spec, u);
    let m_e = m0 - w_coul / c2 - w_rad / c2;
    (m_e, m_e + w_coul / c2)
}
