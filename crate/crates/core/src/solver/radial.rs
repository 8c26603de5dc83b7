//! Spherically symmetric ε–E solver outside a charged shell at `r₀`.
//!
//! The shell sits on the inner boundary. The cavity inside it carries no charge and is
//! modelled as a delay line: what leaves the shell inward returns outward after `2r₀/c`,
//! reflected through the regular centre.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Units;
use crate::scalar::Real;
use crate::shell::{charge, epsilon_field, radial_e, ShellSpec};

/// Charge on the shell as a function of time.
pub trait ChargeLaw<T>: Sync {
    fn charge(&self, t: T) -> T;
}

impl<T: Real> ChargeLaw<T> for ShellSpec<T> {
    fn charge(&self, t: T) -> T {
        charge(t, self)
    }
}

/// A charge that never changes.
#[derive(Clone, Copy, Debug)]
pub struct ConstantCharge<T>(pub T);

impl<T: Real> ChargeLaw<T> for ConstantCharge<T> {
    fn charge(&self, _t: T) -> T {
        self.0
    }
}

impl<T: Real, F: Fn(T) -> T + Sync> ChargeLaw<T> for F {
    fn charge(&self, t: T) -> T {
        self(t)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadialScheme {
    /// Exact transport of the characteristic variables at Courant number 1.
    #[default]
    Characteristic,
    /// Centered differences with classical RK4.
    MethodOfLines,
}

/// Uniform nodes `r_min = r₀ … r_max`, `n` cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialGrid<T> {
    pub r_min: T,
    pub r_max: T,
    pub n: usize,
    pub dr: T,
    pub dt: T,
    pub cfl: T,
}

impl<T: Real> RadialGrid<T> {
    pub fn new(r_min: T, r_max: T, n: usize, cfl: T, u: &Units<T>) -> Result<Self> {
        if n < 16 {
            return Err(Error::config("grid.n", "needs at least 16 cells"));
        }
        if !(r_min > T::zero() && r_max > r_min && r_max.is_finite()) {
            return Err(Error::config("grid.r_max", "needs r_max > r_min > 0"));
        }
        if !(cfl > T::zero() && cfl <= T::one()) {
            return Err(Error::config("grid.cfl", "must lie in (0, 1]"));
        }
        let dr = (r_max - r_min) / T::of(n as f64);
        Ok(Self { r_min, r_max, n, dr, dt: cfl * dr / u.c, cfl })
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn radius(&self, i: usize) -> T {
        self.r_min + self.dr * T::of(i as f64)
    }

    pub fn radii(&self) -> Vec<T> {
        (0..self.len()).map(|i| self.radius(i)).collect()
    }

    /// Node index sitting on `r`, if any.
    pub fn node_at(&self, r: T) -> Option<usize> {
        let x = (r - self.r_min) / self.dr;
        let i = x.round();
        if i >= T::zero() && (x - i).abs() < T::of(1e-9) && i.f64() as usize <= self.n {
            Some(i.f64() as usize)
        } else {
            None
        }
    }

    fn check_cfl(&self, u: &Units<T>) -> Result<()> {
        let limit = self.dr / u.c;
        if self.dt > limit * (T::one() + T::epsilon() * T::of(8.0)) {
            return Err(Error::CflViolation { dt: self.dt.f64(), limit: limit.f64() });
        }
        Ok(())
    }
}

/// ε, radial E and φ on the grid nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialState<T> {
    pub eps: Vec<T>,
    pub e_r: Vec<T>,
    pub phi: Vec<T>,
    pub t: T,
}

/// Field values interpolated at one radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialProbe<T> {
    pub eps: T,
    pub e_r: T,
    pub phi: T,
}

impl<T: Real> RadialState<T> {
    pub fn zero(grid: &RadialGrid<T>) -> Self {
        let z = vec![T::zero(); grid.len()];
        Self { eps: z.clone(), e_r: z.clone(), phi: z, t: T::zero() }
    }

    /// Static field of a charge `q` on the shell.
    pub fn coulomb(grid: &RadialGrid<T>, q: T, u: &Units<T>) -> Self {
        Self::from_fn(grid, T::zero(), |r| {
            let phi = u.zeta * u.c * q / (T::four_pi() * r);
            (T::zero(), phi / r, phi)
        })
    }

    /// State built from `f(r) = (ε, E_r, φ)`.
    pub fn from_fn(grid: &RadialGrid<T>, t: T, f: impl Fn(T) -> (T, T, T)) -> Self {
        let mut s = Self::zero(grid);
        s.t = t;
        for i in 0..grid.len() {
            let (e, er, p) = f(grid.radius(i));
            s.eps[i] = e;
            s.e_r[i] = er;
            s.phi[i] = p;
        }
        s
    }

    pub fn is_finite(&self) -> bool {
        self.eps.iter().chain(&self.e_r).chain(&self.phi).all(|x| x.is_finite())
    }

    /// Linear interpolation between nodes.
    pub fn probe(&self, grid: &RadialGrid<T>, r: T) -> Result<RadialProbe<T>> {
        if r < grid.r_min || r > grid.r_max {
            return Err(Error::Domain(format!("probe radius {:e} outside the grid", r.f64())));
        }
        let x = (r - grid.r_min) / grid.dr;
        let i = (x.floor().f64() as usize).min(grid.n - 1);
        let w = x - T::of(i as f64);
        let lerp = |a: &[T]| a[i] + (a[i + 1] - a[i]) * w;
        Ok(RadialProbe { eps: lerp(&self.eps), e_r: lerp(&self.e_r), phi: lerp(&self.phi) })
    }
}

/// Uniformly sampled history of the incoming characteristic at the shell.
#[derive(Clone, Debug)]
struct ShellHistory<T> {
    t0: T,
    dt: T,
    q_in: Vec<T>,
}

impl<T: Real> ShellHistory<T> {
    fn at(&self, t: T) -> T {
        let x = (t - self.t0) / self.dt;
        if x <= T::zero() {
            return self.q_in[0];
        }
        let last = self.q_in.len() - 1;
        let i = x.floor().f64() as usize;
        if i >= last {
            return self.q_in[last];
        }
        let w = x - T::of(i as f64);
        self.q_in[i] + (self.q_in[i + 1] - self.q_in[i]) * w
    }
}

/// Time stepper for [`RadialState`].
#[derive(Clone, Debug)]
pub struct RadialSolver<T> {
    pub grid: RadialGrid<T>,
    pub units: Units<T>,
    pub scheme: RadialScheme,
    history: Option<ShellHistory<T>>,
}

impl<T: Real> RadialSolver<T> {
    pub fn new(grid: RadialGrid<T>, units: Units<T>, scheme: RadialScheme) -> Result<Self> {
        if scheme == RadialScheme::Characteristic && grid.cfl != T::one() {
            return Err(Error::config("grid.cfl", "the characteristic scheme runs at cfl = 1"));
        }
        grid.check_cfl(&units)?;
        Ok(Self { grid, units, scheme, history: None })
    }

    /// `P = r(ε + E) − φ`, moving outward.
    fn outgoing(&self, s: &RadialState<T>, i: usize) -> T {
        self.grid.radius(i) * (s.eps[i] + s.e_r[i]) - s.phi[i]
    }

    /// `Q = r(ε − E) + φ`, moving inward.
    fn incoming(&self, s: &RadialState<T>, i: usize) -> T {
        self.grid.radius(i) * (s.eps[i] - s.e_r[i]) + s.phi[i]
    }

    /// Outgoing characteristic just outside the shell at time `t`.
    fn shell_outgoing(&self, law: &impl ChargeLaw<T>, t: T) -> T {
        let u = &self.units;
        let r0 = self.grid.r_min;
        let delay = T::two() * r0 / u.c;
        let strength = |q: T| u.zeta * u.c * q / (T::four_pi() * r0);
        let hist = self.history.as_ref().expect("history initialised");
        strength(law.charge(t)) - strength(law.charge(t - delay)) - hist.at(t - delay)
    }

    fn ensure_history(&mut self, s: &RadialState<T>) {
        if self.history.is_none() {
            let q = self.incoming(s, 0);
            self.history = Some(ShellHistory { t0: s.t, dt: self.grid.dt, q_in: vec![q] });
        }
    }

    fn check_state(&self, s: &RadialState<T>) -> Result<()> {
        let n = self.grid.len();
        if s.eps.len() != n || s.e_r.len() != n || s.phi.len() != n {
            return Err(Error::GridMismatch(format!(
                "state has {} nodes, grid has {n}",
                s.eps.len()
            )));
        }
        Ok(())
    }

    /// Advances `state` by one `dt`.
    pub fn step(&mut self, state: &mut RadialState<T>, law: &impl ChargeLaw<T>) -> Result<()> {
        self.check_state(state)?;
        self.grid.check_cfl(&self.units)?;
        self.ensure_history(state);
        match self.scheme {
            RadialScheme::Characteristic => self.step_characteristic(state, law),
            RadialScheme::MethodOfLines => self.step_mol(state, law),
        }
        if !state.is_finite() {
            return Err(Error::NonFiniteState { t: state.t.f64() });
        }
        Ok(())
    }

    fn step_characteristic(&mut self, s: &mut RadialState<T>, law: &impl ChargeLaw<T>) {
        let n = self.grid.n;
        let dt = self.grid.dt;
        let mut p: Vec<T> = (0..=n).map(|i| self.outgoing(s, i)).collect();
        let mut q: Vec<T> = (0..=n).map(|i| self.incoming(s, i)).collect();
        p.rotate_right(1);
        q.rotate_left(1);
        // Nothing comes in from beyond the outer boundary.
        q[n] = T::zero();
        let t_new = s.t + dt;
        if let Some(h) = self.history.as_mut() {
            h.q_in.push(q[0]);
        }
        p[0] = self.shell_outgoing(law, t_new);

        let half_cdt = self.units.c * dt * T::half();
        for i in 0..=n {
            let r = self.grid.radius(i);
            let eps = (p[i] + q[i]) / (T::two() * r);
            s.phi[i] = s.phi[i] + half_cdt * (s.eps[i] + eps);
            s.eps[i] = eps;
            s.e_r[i] = s.phi[i] / r + (p[i] - q[i]) / (T::two() * r);
        }
        s.t = t_new;
    }

    /// Imposes the shell condition on ε at node 0 for the stage state at time `t`.
    fn mol_constrain(&self, s: &mut RadialState<T>, law: &impl ChargeLaw<T>, t: T) {
        let r0 = self.grid.r_min;
        let p = self.shell_outgoing(law, t);
        s.eps[0] = (p + s.phi[0] - r0 * s.e_r[0]) / r0;
    }

    fn mol_rhs(&self, s: &RadialState<T>, out: &mut RadialState<T>) {
        let n = self.grid.n;
        let c = self.units.c;
        let inv2dr = T::one() / (T::two() * self.grid.dr);
        let r = |i: usize| self.grid.radius(i);
        let flux = |i: usize| r(i) * r(i) * s.e_r[i];

        out.eps[0] = T::zero();
        out.e_r[0] = -c * (-T::of(3.0) * s.eps[0] + T::of(4.0) * s.eps[1] - s.eps[2]) * inv2dr;
        out.phi[0] = c * s.eps[0];
        for i in 1..n {
            out.eps[i] = -c * (flux(i + 1) - flux(i - 1)) * inv2dr / (r(i) * r(i));
            out.e_r[i] = -c * (s.eps[i + 1] - s.eps[i - 1]) * inv2dr;
            out.phi[i] = c * s.eps[i];
        }
        let three = T::of(3.0);
        let four = T::of(4.0);
        let rn = r(n);
        let d_eps = -c * (three * flux(n) - four * flux(n - 1) + flux(n - 2)) * inv2dr / (rn * rn);
        let d_e = -c * (three * s.eps[n] - four * s.eps[n - 1] + s.eps[n - 2]) * inv2dr;
        let d_phi = c * s.eps[n];
        // Keep the outgoing part, drop anything incoming.
        let d_p = rn * (d_eps + d_e) - d_phi;
        out.eps[n] = d_p / (T::two() * rn);
        out.e_r[n] = (d_p + T::two() * d_phi) / (T::two() * rn);
        out.phi[n] = d_phi;
    }

    fn step_mol(&mut self, s: &mut RadialState<T>, law: &impl ChargeLaw<T>) {
        let dt = self.grid.dt;
        let t0 = s.t;
        let half = T::half();
        let axpy = |base: &RadialState<T>, k: &RadialState<T>, h: T, t: T| {
            let mut o = base.clone();
            for i in 0..base.eps.len() {
                o.eps[i] = base.eps[i] + h * k.eps[i];
                o.e_r[i] = base.e_r[i] + h * k.e_r[i];
                o.phi[i] = base.phi[i] + h * k.phi[i];
            }
            o.t = t;
            o
        };
        let mut k1 = RadialState::zero(&self.grid);
        let mut k2 = k1.clone();
        let mut k3 = k1.clone();
        let mut k4 = k1.clone();

        let mut y = s.clone();
        self.mol_constrain(&mut y, law, t0);
        self.mol_rhs(&y, &mut k1);
        let mut y2 = axpy(&y, &k1, dt * half, t0 + dt * half);
        self.mol_constrain(&mut y2, law, t0 + dt * half);
        self.mol_rhs(&y2, &mut k2);
        let mut y3 = axpy(&y, &k2, dt * half, t0 + dt * half);
        self.mol_constrain(&mut y3, law, t0 + dt * half);
        self.mol_rhs(&y3, &mut k3);
        let mut y4 = axpy(&y, &k3, dt, t0 + dt);
        self.mol_constrain(&mut y4, law, t0 + dt);
        self.mol_rhs(&y4, &mut k4);

        let sixth = dt / T::of(6.0);
        for i in 0..s.eps.len() {
            let upd = |a: &[T], b: &[T], c: &[T], d: &[T]| a[i] + T::two() * (b[i] + c[i]) + d[i];
            s.eps[i] = y.eps[i] + sixth * upd(&k1.eps, &k2.eps, &k3.eps, &k4.eps);
            s.e_r[i] = y.e_r[i] + sixth * upd(&k1.e_r, &k2.e_r, &k3.e_r, &k4.e_r);
            s.phi[i] = y.phi[i] + sixth * upd(&k1.phi, &k2.phi, &k3.phi, &k4.phi);
        }
        s.t = t0 + dt;
        self.mol_constrain(s, law, s.t);
        let q0 = self.incoming(s, 0);
        if let Some(h) = self.history.as_mut() {
            h.q_in.push(q0);
        }
    }
}

/// A full shell transient on the radial grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct ShellRun<T> {
    pub q0: T,
    pub r0: T,
    pub tau: T,
    pub mode: crate::shell::ChargeMode,
    pub r_max: T,
    pub n: usize,
    #[serde(default = "one")]
    pub cfl: T,
    #[serde(default)]
    pub scheme: RadialScheme,
    pub t_end: T,
    /// Radius of the time-series probe.
    pub probe_r: T,
    /// Radius of the sphere the energy ledger is taken on; must sit on a node.
    pub ledger_r: T,
    /// Keep every `sample_every`-th step in the output series.
    #[serde(default = "one_usize")]
    pub sample_every: usize,
}

fn one<T: Real>() -> T {
    T::one()
}

fn one_usize() -> usize {
    1
}

/// One row of the sampled output series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShellSample<T> {
    pub t: T,
    pub probe: RadialProbe<T>,
    /// Field energy between `r₀` and the ledger radius.
    pub field_energy: T,
    /// Power leaving through the ledger sphere.
    pub outer_flux: T,
    /// Power entering from the cavity inside the shell, `4πr₀²εE_in/ζ`.
    pub inner_flux: T,
    /// Power the shell delivers to the field, `cqε(r₀)`.
    pub shell_power: T,
}

#[derive(Clone, Debug)]
pub struct ShellRunOutput<T> {
    pub grid: RadialGrid<T>,
    pub samples: Vec<ShellSample<T>>,
    pub final_state: RadialState<T>,
    /// Time integral of the shell power.
    pub shell_work: T,
    /// Time integral of the outer flux.
    pub radiated: T,
    pub initial_field_energy: T,
    pub final_field_energy: T,
}

impl<T: Real> ShellRunOutput<T> {
    /// Energy ledger in the sign conventions of [`crate::shell::EnergyLedger`].
    pub fn ledger(&self, mode: crate::shell::ChargeMode) -> crate::shell::EnergyLedger<T> {
        use crate::shell::ChargeMode::*;
        let (delta_rest_energy, w_coul) = match mode {
            Growth => (self.shell_work, self.final_field_energy - self.initial_field_energy),
            Decay => (-self.shell_work, self.initial_field_energy - self.final_field_energy),
        };
        let w_rad = self.radiated;
        let residual = match mode {
            Growth => delta_rest_energy - (w_coul + w_rad),
            Decay => w_coul - (delta_rest_energy + w_rad),
        };
        crate::shell::EnergyLedger { mode, delta_rest_energy, w_coul, w_rad, residual }
    }
}

/// Field energy on nodes `0..=m`, trapezoidal in `r`.
pub fn field_energy<T: Real>(s: &RadialState<T>, grid: &RadialGrid<T>, m: usize, u: &Units<T>) -> T {
    let dens = |i: usize| {
        let r = grid.radius(i);
        (s.eps[i] * s.eps[i] + s.e_r[i] * s.e_r[i]) * T::four_pi() * r * r
    };
    let mut sum = (dens(0) + dens(m)) * T::half();
    for i in 1..m {
        sum = sum + dens(i);
    }
    sum * grid.dr / (T::two() * u.zeta * u.c)
}

/// Runs a growing or decaying shell from its `t = 0` state to `t_end`.
pub fn run_shell<T: Real>(cfg: &ShellRun<T>, u: &Units<T>) -> Result<ShellRunOutput<T>> {
    use crate::shell::ChargeMode;
    if u.kappa != T::zero() {
        return Err(Error::config("units.kappa", "shell runs need kappa = 0"));
    }
    if cfg.sample_every == 0 {
        return Err(Error::config("sample_every", "must be at least 1"));
    }
    if !(cfg.t_end >= T::zero() && cfg.t_end.is_finite()) {
        return Err(Error::config("t_end", "must be finite and non-negative"));
    }
    let spec = ShellSpec::new(cfg.q0, cfg.r0, cfg.tau, cfg.mode)?;
    let grid = RadialGrid::new(cfg.r0, cfg.r_max, cfg.n, cfg.cfl, u)?;
    let m = grid
        .node_at(cfg.ledger_r)
        .ok_or_else(|| Error::config("ledger_r", "must sit on a grid node"))?;
    if cfg.probe_r < grid.r_min || cfg.probe_r > grid.r_max {
        return Err(Error::config("probe_r", "must lie inside the grid"));
    }
    let mut solver = RadialSolver::new(grid, *u, cfg.scheme)?;
    let mut state = match cfg.mode {
        ChargeMode::Growth => RadialState::zero(&grid),
        ChargeMode::Decay => RadialState::coulomb(&grid, cfg.q0, u),
    };
    let r_led = grid.radius(m);
    let sample = |s: &RadialState<T>| -> Result<ShellSample<T>> {
        Ok(ShellSample {
            t: s.t,
            probe: s.probe(&grid, cfg.probe_r)?,
            field_energy: field_energy(s, &grid, m, u),
            outer_flux: T::four_pi() * r_led * r_led * s.eps[m] * s.e_r[m] / u.zeta,
            inner_flux: {
                let r0 = grid.r_min;
                // The surface charge makes E jump; the cavity side sees what is left.
                let e_in = s.e_r[0] - u.zeta * u.c * spec.charge(s.t) / (T::four_pi() * r0 * r0);
                T::four_pi() * r0 * r0 * s.eps[0] * e_in / u.zeta
            },
            shell_power: u.c * spec.charge(s.t) * s.eps[0],
        })
    };
    let steps = (cfg.t_end / grid.dt - T::of(1e-9)).ceil().f64().max(0.0) as usize;
    let first = sample(&state)?;
    let initial_field_energy = first.field_energy;
    let mut samples = vec![first];
    let (mut shell_work, mut radiated) = (T::zero(), T::zero());
    let mut prev = first;
    for k in 1..=steps {
        solver.step(&mut state, &spec)?;
        let cur = sample(&state)?;
        let h = grid.dt * T::half();
        shell_work = shell_work + h * (prev.shell_power + cur.shell_power);
        radiated = radiated + h * (prev.outer_flux + cur.outer_flux);
        if k % cfg.sample_every == 0 || k == steps {
            samples.push(cur);
        }
        prev = cur;
    }
    Ok(ShellRunOutput {
        grid,
        samples,
        final_field_energy: prev.field_energy,
        final_state: state,
        shell_work,
        radiated,
        initial_field_energy,
    })
}

/// Relative L2 error of the probe ε and E series of a run against the closed forms.
pub fn probe_error<T: Real>(out: &ShellRunOutput<T>, cfg: &ShellRun<T>, u: &Units<T>) -> Result<T> {
    let spec = ShellSpec::new(cfg.q0, cfg.r0, cfg.tau, cfg.mode)?;
    let (mut num, mut den) = (T::zero(), T::zero());
    for s in &out.samples {
        let e = epsilon_field(cfg.probe_r, s.t, &spec, u)?;
        let er = radial_e(cfg.probe_r, s.t, &spec, u)?;
        num = num + (s.probe.eps - e).powi(2) + (s.probe.e_r - er).powi(2);
        den = den + e * e + er * er;
    }
    Ok(if den == T::zero() { num.sqrt() } else { (num / den).sqrt() })
}
