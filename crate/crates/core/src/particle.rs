//! Test particles whose rest mass responds to ε.
//!
//! The state is `(x, p, m)`; the energy `𝓔 = √(m²c⁴ + p²c²)` is always derived, so the mass
//! shell holds by construction. [`TrackedParticle`] additionally integrates `d𝓔/dt` on its
//! own, which turns the mass-shell identity into a real check on the mass law.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldPoint, Units};
use crate::scalar::Real;
use crate::shell::{self, ShellSpec};
use crate::vec3::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParticleState<T> {
    pub q: T,
    pub m: T,
    pub x: Vec3<T>,
    pub p: Vec3<T>,
    pub t: T,
}

impl<T: Real> ParticleState<T> {
    pub fn at_rest(q: T, m: T, x: Vec3<T>) -> Self {
        Self { q, m, x, p: Vec3::zero(), t: T::zero() }
    }

    pub fn energy(&self, u: &Units<T>) -> T {
        let c2 = u.c * u.c;
        (self.m * self.m * c2 * c2 + self.p.norm2() * c2).sqrt()
    }

    pub fn velocity(&self, u: &Units<T>) -> Vec3<T> {
        self.p * (u.c * u.c / self.energy(u))
    }

    /// `√(1 − v²/c²)`, computed as `mc²/𝓔` to avoid cancellation.
    pub fn inverse_gamma(&self, u: &Units<T>) -> T {
        self.m * u.c * u.c / self.energy(u)
    }

    pub fn is_finite(&self) -> bool {
        self.m.is_finite() && self.x.is_finite() && self.p.is_finite() && self.t.is_finite()
    }
}

/// `(d𝓔/dt, dp/dt)` for a particle in the field `f`.
pub fn force_and_power<T: Real>(s: &ParticleState<T>, f: &FieldPoint<T>, u: &Units<T>) -> (T, Vec3<T>) {
    let v = s.velocity(u);
    let power = s.q * v.dot(&f.e) - s.q * u.c * f.eps;
    let force = f.e * s.q + v.cross(&f.cb) * (s.q / u.c) - v * (s.q * f.eps / u.c);
    (power, force)
}

/// `dm/dt = −qε√(1 − v²/c²)/c`.
pub fn mass_rate<T: Real>(s: &ParticleState<T>, eps: T, u: &Units<T>) -> T {
    -s.q * eps * s.inverse_gamma(u) / u.c
}

/// A charge element of an extended distribution: `ρ dV`, the local ε and velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChargeElement<T> {
    pub dq: T,
    pub eps: T,
    pub v: Vec3<T>,
}

/// `dmc²/dt = −Σ c ρε√(1 − v²/c²) dV` over the elements, summed in order.
pub fn distributed_mass_rate<T: Real>(elements: &[ChargeElement<T>], u: &Units<T>) -> T {
    let c = u.c;
    elements.iter().fold(T::zero(), |acc, el| {
        let beta2 = el.v.norm2() / (c * c);
        acc - c * el.dq * el.eps * (T::one() - beta2).max(T::zero()).sqrt()
    })
}

/// `𝓔 + qφ₁`, conserved for a particle moving in the field of a source charge.
pub fn interaction_invariant<T: Real>(s: &ParticleState<T>, phi1: T, u: &Units<T>) -> T {
    s.energy(u) + s.q * phi1
}

/// Fields (and the source potential) seen by a particle.
pub trait FieldSampler<T: Real>: Sync {
    fn field(&self, t: T, x: Vec3<T>) -> Result<FieldPoint<T>>;

    /// Scalar potential of the source; zero unless the sampler knows it.
    fn potential(&self, _t: T, _x: Vec3<T>) -> Result<T> {
        Ok(T::zero())
    }
}

/// Uniform fields, constant in time.
#[derive(Clone, Copy, Debug)]
pub struct UniformField<T>(pub FieldPoint<T>);

impl<T: Real> FieldSampler<T> for UniformField<T> {
    fn field(&self, _t: T, _x: Vec3<T>) -> Result<FieldPoint<T>> {
        Ok(self.0)
    }
}

/// Static point charge.
#[derive(Clone, Copy, Debug)]
pub struct CoulombSource<T> {
    pub q: T,
    pub center: Vec3<T>,
    pub units: Units<T>,
}

impl<T: Real> CoulombSource<T> {
    fn radius(&self, x: Vec3<T>) -> Result<(Vec3<T>, T)> {
        let d = x - self.center;
        let r = d.norm();
        if !(r > T::zero()) {
            return Err(Error::Domain("particle sits on the source charge".into()));
        }
        Ok((d, r))
    }
}

impl<T: Real> FieldSampler<T> for CoulombSource<T> {
    fn field(&self, _t: T, x: Vec3<T>) -> Result<FieldPoint<T>> {
        let (d, r) = self.radius(x)?;
        let phi = shell::coulomb_potential(self.q, r, &self.units);
        Ok(FieldPoint { e: d * (phi / (r * r)), ..FieldPoint::zero() })
    }

    fn potential(&self, _t: T, x: Vec3<T>) -> Result<T> {
        Ok(shell::coulomb_potential(self.q, self.radius(x)?.1, &self.units))
    }
}

/// Closed-form fields of a growing or decaying shell, valid outside its radius.
#[derive(Clone, Copy, Debug)]
pub struct ShellSource<T> {
    pub spec: ShellSpec<T>,
    pub center: Vec3<T>,
    pub units: Units<T>,
}

impl<T: Real> FieldSampler<T> for ShellSource<T> {
    fn field(&self, t: T, x: Vec3<T>) -> Result<FieldPoint<T>> {
        let d = x - self.center;
        let r = d.norm();
        let eps = shell::epsilon_field(r, t, &self.spec, &self.units)?;
        let e_r = shell::radial_e(r, t, &self.spec, &self.units)?;
        Ok(FieldPoint { eps, e: d * (e_r / r), ..FieldPoint::zero() })
    }

    fn potential(&self, t: T, x: Vec3<T>) -> Result<T> {
        shell::potential((x - self.center).norm(), t, &self.spec, &self.units)
    }
}

#[derive(Clone, Copy)]
struct Deriv<T> {
    dx: Vec3<T>,
    dp: Vec3<T>,
    dm: T,
    de: T,
}

fn derivative<T: Real>(
    s: &ParticleState<T>,
    sampler: &impl FieldSampler<T>,
    u: &Units<T>,
) -> Result<Deriv<T>> {
    let f = sampler.field(s.t, s.x)?;
    let (de, dp) = force_and_power(s, &f, u);
    Ok(Deriv { dx: s.velocity(u), dp, dm: mass_rate(s, f.eps, u), de })
}

fn advance<T: Real>(s: &ParticleState<T>, k: &Deriv<T>, h: T) -> ParticleState<T> {
    ParticleState { q: s.q, m: s.m + k.dm * h, x: s.x + k.dx * h, p: s.p + k.dp * h, t: s.t + h }
}

/// One RK4 step; returns the new state and the RK4 increment of 𝓔 built from `d𝓔/dt`.
fn rk4<T: Real>(
    s: &ParticleState<T>,
    sampler: &impl FieldSampler<T>,
    dt: T,
    u: &Units<T>,
) -> Result<(ParticleState<T>, T)> {
    if !(dt > T::zero() && dt.is_finite()) {
        return Err(Error::Domain(format!("time step must be positive, got {:e}", dt.f64())));
    }
    let half = dt * T::half();
    let k1 = derivative(s, sampler, u)?;
    let y2 = advance(s, &k1, half);
    if !(y2.m > T::zero()) {
        return Err(Error::MassNonPositive { t: y2.t.f64(), m: y2.m.f64() });
    }
    let k2 = derivative(&y2, sampler, u)?;
    let y3 = advance(s, &k2, half);
    if !(y3.m > T::zero()) {
        return Err(Error::MassNonPositive { t: y3.t.f64(), m: y3.m.f64() });
    }
    let k3 = derivative(&y3, sampler, u)?;
    let y4 = advance(s, &k3, dt);
    if !(y4.m > T::zero()) {
        return Err(Error::MassNonPositive { t: y4.t.f64(), m: y4.m.f64() });
    }
    let k4 = derivative(&y4, sampler, u)?;
    let w = dt / T::of(6.0);
    let two = T::two();
    let comb = |a: T, b: T, c: T, d: T| (a + two * (b + c) + d) * w;
    let combv = |a: Vec3<T>, b: Vec3<T>, c: Vec3<T>, d: Vec3<T>| (a + (b + c) * two + d) * w;
    let next = ParticleState {
        q: s.q,
        m: s.m + comb(k1.dm, k2.dm, k3.dm, k4.dm),
        x: s.x + combv(k1.dx, k2.dx, k3.dx, k4.dx),
        p: s.p + combv(k1.dp, k2.dp, k3.dp, k4.dp),
        t: s.t + dt,
    };
    if !(next.m > T::zero()) {
        return Err(Error::MassNonPositive { t: next.t.f64(), m: next.m.f64() });
    }
    if !next.is_finite() {
        return Err(Error::NonFiniteState { t: next.t.f64() });
    }
    Ok((next, comb(k1.de, k2.de, k3.de, k4.de)))
}

/// Advances the particle by `dt` with classical RK4. A step that would make the mass
/// non-positive is rejected.
pub fn push<T: Real>(
    s: &ParticleState<T>,
    sampler: &impl FieldSampler<T>,
    dt: T,
    u: &Units<T>,
) -> Result<ParticleState<T>> {
    rk4(s, sampler, dt, u).map(|(n, _)| n)
}

/// A particle with an independently integrated energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrackedParticle<T> {
    pub state: ParticleState<T>,
    pub energy: T,
}

impl<T: Real> TrackedParticle<T> {
    pub fn new(state: ParticleState<T>, u: &Units<T>) -> Self {
        Self { energy: state.energy(u), state }
    }

    /// `(𝓔² − p²c² − m²c⁴)/𝓔²` with the tracked energy.
    pub fn mass_shell_residual(&self, u: &Units<T>) -> T {
        let c2 = u.c * u.c;
        let e2 = self.energy * self.energy;
        (e2 - self.state.p.norm2() * c2 - self.state.m * self.state.m * c2 * c2) / e2
    }
}

pub fn push_tracked<T: Real>(
    s: &TrackedParticle<T>,
    sampler: &impl FieldSampler<T>,
    dt: T,
    u: &Units<T>,
) -> Result<TrackedParticle<T>> {
    let (state, de) = rk4(&s.state, sampler, dt, u)?;
    Ok(TrackedParticle { state, energy: s.energy + de })
}

/// Source charge for the two-charge scenario.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OrbitSource {
    Static,
    /// Charge `q₁` spread on a shell of radius `r0`, switched on with time constant `tau`.
    Growth { r0: f64, tau: f64 },
}

/// Test particle `q, m` moving around a source charge `q1` at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitRun {
    pub q: f64,
    pub m: f64,
    pub q1: f64,
    pub x0: [f64; 3],
    pub p0: [f64; 3],
    pub dt: f64,
    pub steps: usize,
    pub source: OrbitSource,
    /// Keep every `sample_every`-th step.
    pub sample_every: usize,
}

impl Default for OrbitRun {
    /// A weakly bound orbit, `qq₁ζc/4π = −0.1`.
    fn default() -> Self {
        Self {
            q: -1.0,
            m: 1.0,
            q1: 0.4 * std::f64::consts::PI,
            x0: [1.0, 0.0, 0.0],
            p0: [0.0, 0.2, 0.0],
            dt: 0.01,
            steps: 10_000,
            source: OrbitSource::Static,
            sample_every: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrbitRow<T> {
    pub t: T,
    pub x: Vec3<T>,
    pub p: Vec3<T>,
    pub m: T,
    pub energy: T,
    pub invariant: T,
    pub mass_shell: T,
}

#[derive(Clone, Debug)]
pub struct OrbitOutput<T> {
    pub rows: Vec<OrbitRow<T>>,
    /// Largest `|I(t) − I(0)|/|I(0)|` of the interaction invariant over every step.
    pub max_drift: T,
    /// Largest tracked mass-shell residual over every step.
    pub max_mass_shell: T,
}

pub fn run_orbit<T: Real>(cfg: &OrbitRun, u: &Units<T>) -> Result<OrbitOutput<T>> {
    if !(cfg.m > 0.0) {
        return Err(Error::config("m", "must be positive"));
    }
    if !(cfg.dt > 0.0) {
        return Err(Error::config("dt", "must be positive"));
    }
    if cfg.sample_every == 0 {
        return Err(Error::config("sample_every", "must be at least 1"));
    }
    let v3 = |a: [f64; 3]| Vec3::new(T::of(a[0]), T::of(a[1]), T::of(a[2]));
    let state = ParticleState { q: T::of(cfg.q), m: T::of(cfg.m), x: v3(cfg.x0), p: v3(cfg.p0), t: T::zero() };
    match cfg.source {
        OrbitSource::Static => {
            let src = CoulombSource { q: T::of(cfg.q1), center: Vec3::zero(), units: *u };
            orbit_loop(state, &src, cfg, u)
        }
        OrbitSource::Growth { r0, tau } => {
            if u.kappa != T::zero() {
                return Err(Error::config("units.kappa", "shell sources need kappa = 0"));
            }
            let spec = ShellSpec::new(T::of(cfg.q1), T::of(r0), T::of(tau), shell::ChargeMode::Growth)?;
            orbit_loop(state, &ShellSource { spec, center: Vec3::zero(), units: *u }, cfg, u)
        }
    }
}

fn orbit_loop<T: Real>(
    state: ParticleState<T>,
    src: &impl FieldSampler<T>,
    cfg: &OrbitRun,
    u: &Units<T>,
) -> Result<OrbitOutput<T>> {
    let mut p = TrackedParticle::new(state, u);
    let row = |p: &TrackedParticle<T>| -> Result<OrbitRow<T>> {
        let s = &p.state;
        Ok(OrbitRow {
            t: s.t,
            x: s.x,
            p: s.p,
            m: s.m,
            energy: s.energy(u),
            invariant: interaction_invariant(s, src.potential(s.t, s.x)?, u),
            mass_shell: p.mass_shell_residual(u),
        })
    };
    let first = row(&p)?;
    let i0 = first.invariant;
    let mut rows = vec![first];
    let (mut max_drift, mut max_mass_shell) = (T::zero(), T::zero());
    for k in 1..=cfg.steps {
        p = push_tracked(&p, src, T::of(cfg.dt), u)?;
        let r = row(&p)?;
        max_drift = max_drift.max((r.invariant - i0).abs() / i0.abs());
        max_mass_shell = max_mass_shell.max(r.mass_shell.abs());
        if k % cfg.sample_every == 0 || k == cfg.steps {
            rows.push(r);
        }
    }
    Ok(OrbitOutput { rows, max_drift, max_mass_shell })
}
