//! One-dimensional (along x) solver for all sixteen fields: centered second-order differences
//! and classical RK4.

use num_complex::Complex;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldPoint, SourcePoint, Units};
use crate::scalar::Real;

/// Cells handed to one rayon task; keeps small grids effectively sequential.
const PAR_CHUNK: usize = 512;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    #[default]
    Periodic,
    /// Characteristic outflow at both ends: incoming invariants are held fixed.
    Outflow,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CartesianGrid<T> {
    pub x_min: T,
    pub x_max: T,
    /// Cell count. Periodic grids have `n` nodes, outflow grids `n + 1`.
    pub n: usize,
    pub dx: T,
    pub dt: T,
    pub cfl: T,
    pub boundary: Boundary,
}

impl<T: Real> CartesianGrid<T> {
    pub fn new(x_min: T, x_max: T, n: usize, cfl: T, boundary: Boundary, u: &Units<T>) -> Result<Self> {
        if n < 16 {
            return Err(Error::config("grid.n", "needs at least 16 cells"));
        }
        if !(x_max > x_min && (x_max - x_min).is_finite()) {
            return Err(Error::config("grid.length", "must be positive and finite"));
        }
        if !(cfl > T::zero() && cfl <= T::one()) {
            return Err(Error::config("grid.cfl", "must lie in (0, 1]"));
        }
        let dx = (x_max - x_min) / T::of(n as f64);
        Ok(Self { x_min, x_max, n, dx, dt: cfl * dx / u.c, cfl, boundary })
    }

    pub fn len(&self) -> usize {
        match self.boundary {
            Boundary::Periodic => self.n,
            Boundary::Outflow => self.n + 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> T {
        self.x_min + self.dx * T::of(i as f64)
    }
}

/// The sixteen fields on every node, stored per node in field column order.
#[derive(Clone, Debug, PartialEq)]
pub struct CartesianState1D<T> {
    pub cells: Vec<[T; 16]>,
    pub t: T,
}

impl<T: Real> CartesianState1D<T> {
    pub fn zero(grid: &CartesianGrid<T>) -> Self {
        Self { cells: vec![[T::zero(); 16]; grid.len()], t: T::zero() }
    }

    pub fn from_fn(grid: &CartesianGrid<T>, t: T, f: impl Fn(T) -> FieldPoint<T>) -> Self {
        Self { cells: (0..grid.len()).map(|i| f(grid.x(i)).to_array()).collect(), t }
    }

    /// One field component across the grid.
    pub fn field(&self, k: usize) -> Vec<T> {
        self.cells.iter().map(|c| c[k]).collect()
    }

    pub fn point(&self, i: usize) -> FieldPoint<T> {
        FieldPoint::from_array(self.cells[i])
    }

    pub fn is_finite(&self) -> bool {
        self.cells.iter().all(|c| c.iter().all(|x| x.is_finite()))
    }
}

/// Source densities as functions of `(t, x)`.
pub trait SourceField<T>: Sync {
    fn source(&self, t: T, x: T) -> SourcePoint<T>;

    /// Lets the stepper skip evaluation entirely.
    fn is_zero(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NoSources;

impl<T: Real> SourceField<T> for NoSources {
    fn source(&self, _t: T, _x: T) -> SourcePoint<T> {
        SourcePoint::zero()
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// Characteristic pairs `(a, b, s)`: `a + s·b` moves toward +x, `a − s·b` toward −x.
pub const CHARACTERISTIC_PAIRS: [(usize, usize, i8); 8] = [
    (0, 2, 1),
    (1, 5, -1),
    (3, 7, 1),
    (4, 6, -1),
    (8, 9, 1),
    (10, 15, 1),
    (11, 14, -1),
    (12, 13, 1),
];

/// Transport part `−A ∂ₓu` of `∂u/∂x⁰` given the x-derivatives `d`.
#[inline]
fn transport<T: Real>(d: &[T; 16]) -> [T; 16] {
    [
        -d[2],
        d[5],
        -d[0],
        -d[7],
        d[6],
        d[1],
        d[4],
        -d[3],
        -d[9],
        -d[8],
        -d[15],
        d[14],
        -d[13],
        -d[12],
        d[11],
        -d[10],
    ]
}

/// Mass coupling and source terms of `∂u/∂x⁰`.
#[inline]
fn coupling<T: Real>(f: &[T; 16], k: T, src: Option<&SourcePoint<T>>, u: &Units<T>) -> [T; 16] {
    let mut o = [
        k * f[8],
        k * f[12],
        -k * f[9],
        -k * f[10],
        -k * f[11],
        k * f[13],
        k * f[14],
        k * f[15],
        -k * f[0],
        k * f[2],
        k * f[3],
        k * f[4],
        -k * f[1],
        -k * f[5],
        -k * f[6],
        -k * f[7],
    ];
    if let Some(s) = src {
        let (z, zc) = (u.zeta, u.zeta * u.c);
        o[0] = o[0] + zc * s.rho_e;
        o[1] = o[1] + zc * s.rho_m;
        for i in 0..3 {
            o[2 + i] = o[2 + i] - z * s.j_e[i];
            o[5 + i] = o[5 + i] + z * s.j_m[i];
            o[9 + i] = o[9 + i] - z * s.k[i];
            o[13 + i] = o[13 + i] + z * s.l[i];
        }
        o[8] = o[8] + z * s.s;
        o[12] = o[12] - z * s.p;
    }
    o
}

/// Explicit stepper for [`CartesianState1D`].
#[derive(Debug)]
pub struct CartesianSolver<T> {
    pub grid: CartesianGrid<T>,
    pub units: Units<T>,
    scratch: Mutex<Scratch<T>>,
}

/// RK4 work buffers, kept between steps so large grids do not allocate every step.
#[derive(Debug, Default)]
struct Scratch<T> {
    acc: Vec<[T; 16]>,
    ya: Vec<[T; 16]>,
    yb: Vec<[T; 16]>,
}

impl<T: Real> Clone for CartesianSolver<T> {
    fn clone(&self) -> Self {
        Self { grid: self.grid, units: self.units, scratch: Mutex::new(Scratch { acc: vec![], ya: vec![], yb: vec![] }) }
    }
}

impl<T: Real> CartesianSolver<T> {
    pub fn new(grid: CartesianGrid<T>, units: Units<T>) -> Result<Self> {
        let s = Self { grid, units, scratch: Mutex::new(Scratch { acc: vec![], ya: vec![], yb: vec![] }) };
        s.check_cfl()?;
        Ok(s)
    }

    fn check_cfl(&self) -> Result<()> {
        let limit = self.grid.dx / self.units.c;
        if self.grid.dt > limit * (T::one() + T::epsilon() * T::of(8.0)) {
            return Err(Error::CflViolation { dt: self.grid.dt.f64(), limit: limit.f64() });
        }
        Ok(())
    }

    /// x-derivative of every field at node `i`.
    #[inline]
    fn derivative(&self, c: &[[T; 16]], i: usize) -> [T; 16] {
        let n = c.len();
        let inv2dx = T::one() / (T::two() * self.grid.dx);
        match self.grid.boundary {
            Boundary::Periodic => {
                let l = if i == 0 { &c[n - 1] } else { &c[i - 1] };
                let r = if i + 1 == n { &c[0] } else { &c[i + 1] };
                std::array::from_fn(|k| (r[k] - l[k]) * inv2dx)
            }
            Boundary::Outflow => {
                let three = T::of(3.0);
                let four = T::of(4.0);
                if i == 0 {
                    std::array::from_fn(|k| (-three * c[0][k] + four * c[1][k] - c[2][k]) * inv2dx)
                } else if i == n - 1 {
                    std::array::from_fn(|k| {
                        (three * c[i][k] - four * c[i - 1][k] + c[i - 2][k]) * inv2dx
                    })
                } else {
                    std::array::from_fn(|k| (c[i + 1][k] - c[i - 1][k]) * inv2dx)
                }
            }
        }
    }

    /// `∂u/∂t` at node `i`.
    fn rhs_at(&self, c: &[[T; 16]], i: usize, t: T, sources: &impl SourceField<T>) -> [T; 16] {
        let d = self.derivative(c, i);
        let mut tr = transport(&d);
        if self.grid.boundary == Boundary::Outflow && (i == 0 || i == c.len() - 1) {
            let right_end = i != 0;
            for &(a, b, s) in &CHARACTERISTIC_PAIRS {
                let s = T::of(s as f64);
                // Keep only the family leaving the domain through this end.
                let (sign, w) = if right_end { (s, tr[a] + s * tr[b]) } else { (-s, tr[a] - s * tr[b]) };
                tr[a] = w * T::half();
                tr[b] = sign * w * T::half();
            }
        }
        let src = if sources.is_zero() { None } else { Some(sources.source(t, self.grid.x(i))) };
        let cp = coupling(&c[i], self.units.kappa, src.as_ref(), &self.units);
        std::array::from_fn(|k| self.units.c * (tr[k] + cp[k]))
    }

    fn rhs(&self, c: &[[T; 16]], t: T, sources: &impl SourceField<T>, out: &mut [[T; 16]]) {
        out.par_iter_mut()
            .with_min_len(PAR_CHUNK)
            .enumerate()
            .for_each(|(i, o)| *o = self.rhs_at(c, i, t, sources));
    }

    /// Advances the state by one `dt`.
    pub fn step(&self, state: &mut CartesianState1D<T>, sources: &impl SourceField<T>) -> Result<()> {
        self.check_cfl()?;
        if state.cells.len() != self.grid.len() {
            return Err(Error::GridMismatch(format!(
                "state has {} nodes, grid has {}",
                state.cells.len(),
                self.grid.len()
            )));
        }
        let dt = self.grid.dt;
        let half = dt * T::half();
        let t0 = state.t;
        let n = state.cells.len();
        let mut guard = self.scratch.lock().unwrap_or_else(|e| e.into_inner());
        let Scratch { acc, ya, yb } = &mut *guard;
        for b in [&mut *acc, &mut *ya, &mut *yb] {
            b.resize(n, [T::zero(); 16]);
        }

        // Each stage evaluates k at every node, folds it into the weighted sum and writes the
        // next stage input in the same pass.
        let base = &state.cells;
        let two = T::two();
        acc.par_iter_mut().zip(ya.par_iter_mut()).with_min_len(PAR_CHUNK).enumerate().for_each(|(i, (a, y))| {
            let k = self.rhs_at(base, i, t0, sources);
            *a = k;
            *y = std::array::from_fn(|j| base[i][j] + half * k[j]);
        });
        let ya_ref = &*ya;
        acc.par_iter_mut().zip(yb.par_iter_mut()).with_min_len(PAR_CHUNK).enumerate().for_each(|(i, (a, y))| {
            let k = self.rhs_at(ya_ref, i, t0 + half, sources);
            *a = std::array::from_fn(|j| a[j] + two * k[j]);
            *y = std::array::from_fn(|j| base[i][j] + half * k[j]);
        });
        let yb_ref = &*yb;
        acc.par_iter_mut().zip(ya.par_iter_mut()).with_min_len(PAR_CHUNK).enumerate().for_each(|(i, (a, y))| {
            let k = self.rhs_at(yb_ref, i, t0 + half, sources);
            *a = std::array::from_fn(|j| a[j] + two * k[j]);
            *y = std::array::from_fn(|j| base[i][j] + dt * k[j]);
        });
        let ya_ref = &*ya;
        let acc_ref = &*acc;
        let sixth = dt / T::of(6.0);
        state.cells.par_iter_mut().with_min_len(PAR_CHUNK).enumerate().for_each(|(i, c)| {
            let k = self.rhs_at(ya_ref, i, t0 + dt, sources);
            for j in 0..16 {
                c[j] = c[j] + sixth * (acc_ref[i][j] + k[j]);
            }
        });
        state.t = t0 + dt;
        if !state.is_finite() {
            return Err(Error::NonFiniteState { t: state.t.f64() });
        }
        Ok(())
    }

    /// `∂u/∂t` at every node, exposed for consistency checks.
    pub fn time_derivative(&self, state: &CartesianState1D<T>, sources: &impl SourceField<T>) -> Vec<[T; 16]> {
        let mut out = vec![[T::zero(); 16]; state.cells.len()];
        self.rhs(&state.cells, state.t, sources, &mut out);
        out
    }
}

/// Complex amplitude of the spatial Fourier mode `m` of field `k` on a periodic grid.
pub fn mode_amplitude<T: Real>(state: &CartesianState1D<T>, k: usize, m: usize) -> Complex<T> {
    let n = state.cells.len();
    let mut acc = Complex::new(T::zero(), T::zero());
    for (j, c) in state.cells.iter().enumerate() {
        // Reduce the angle in integers so large mode numbers keep full precision.
        let theta = T::two() * T::PI() * T::of(((m * j) % n) as f64) / T::of(n as f64);
        acc = acc + Complex::new(theta.cos(), -theta.sin()) * c[k];
    }
    acc * T::two() / T::of(n as f64)
}

/// Longitudinal ε–E plane wave on a periodic box one wavelength long.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct PlaneWaveRun<T> {
    pub eps0: T,
    pub wavelength: T,
    pub n: usize,
    pub cfl: T,
    /// Number of times the wave crosses the box.
    pub crossings: usize,
    /// Phase samples per crossing.
    pub samples_per_crossing: usize,
}

impl<T: Real> Default for PlaneWaveRun<T> {
    fn default() -> Self {
        Self { eps0: T::one(), wavelength: T::one(), n: 4096, cfl: T::one(), crossings: 10, samples_per_crossing: 16 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlaneWaveSample<T> {
    pub t: T,
    /// Unwrapped phase of the fundamental ε mode.
    pub phase: T,
    pub eps_probe: T,
    pub e_probe: T,
    pub eps_exact: T,
}

#[derive(Clone, Debug)]
pub struct PlaneWaveOutput<T> {
    pub grid: CartesianGrid<T>,
    pub samples: Vec<PlaneWaveSample<T>>,
    /// Phase speed from a least-squares fit of phase against time.
    pub phase_speed: T,
    /// Relative L2 error of the final ε and E profiles.
    pub shape_error: T,
    /// Largest |cB| seen, relative to the largest |E|.
    pub b_ratio: T,
    pub final_state: CartesianState1D<T>,
}

pub fn run_plane_wave<T: Real>(cfg: &PlaneWaveRun<T>, u: &Units<T>) -> Result<PlaneWaveOutput<T>> {
    if u.kappa != T::zero() {
        return Err(Error::config("units.kappa", "the plane-wave run needs kappa = 0"));
    }
    if cfg.crossings == 0 || cfg.samples_per_crossing == 0 {
        return Err(Error::config("crossings", "crossings and samples_per_crossing must be positive"));
    }
    if !(cfg.wavelength > T::zero()) {
        return Err(Error::config("wavelength", "must be positive"));
    }
    let grid = CartesianGrid::new(T::zero(), cfg.wavelength, cfg.n, cfg.cfl, Boundary::Periodic, u)?;
    let solver = CartesianSolver::new(grid, *u)?;
    let omega = T::two() * T::PI() * u.c / cfg.wavelength;
    let kx = omega / u.c;
    let xhat = crate::Vec3::unit(0);
    let exact = |t: T, x: T| crate::field::plane_wave(cfg.eps0, omega, xhat, t, crate::Vec3::new(x, T::zero(), T::zero()), u);
    // Validate the wave parameters once up front.
    exact(T::zero(), T::zero())?;
    let mut state = CartesianState1D::from_fn(&grid, T::zero(), |x| exact(T::zero(), x).expect("validated"));

    let crossing_time = cfg.wavelength / u.c;
    let t_end = crossing_time * T::of(cfg.crossings as f64);
    let steps = (t_end / grid.dt).round().f64() as usize;
    let every = (steps / (cfg.crossings * cfg.samples_per_crossing)).max(1);
    let probe = cfg.n / 4;
    let sample = |s: &CartesianState1D<T>, unwrapped: T| PlaneWaveSample {
        t: s.t,
        phase: unwrapped,
        eps_probe: s.cells[probe][0],
        e_probe: s.cells[probe][2],
        eps_exact: exact(s.t, grid.x(probe)).expect("validated").eps,
    };
    let mut phase = mode_amplitude(&state, 0, 1).arg();
    let mut samples = vec![sample(&state, phase)];
    let mut b_max = T::zero();
    let mut e_max = T::zero();
    for step in 1..=steps {
        solver.step(&mut state, &NoSources)?;
        if step % every == 0 || step == steps {
            let a = mode_amplitude(&state, 0, 1).arg();
            let prev = phase - (phase / (T::two() * T::PI())).round() * T::two() * T::PI();
            let mut d = a - prev;
            while d > T::PI() {
                d = d - T::two() * T::PI();
            }
            while d <= -T::PI() {
                d = d + T::two() * T::PI();
            }
            phase = phase + d;
            samples.push(sample(&state, phase));
            for c in &state.cells {
                b_max = b_max.max(c[5].abs()).max(c[6].abs()).max(c[7].abs());
                e_max = e_max.max(c[2].abs()).max(c[3].abs()).max(c[4].abs());
            }
        }
    }
    // Least-squares slope of phase against time; the fundamental moves as e^{−ik(x − vt)}.
    let nt = T::of(samples.len() as f64);
    let tm = samples.iter().map(|s| s.t).sum::<T>() / nt;
    let pm = samples.iter().map(|s| s.phase).sum::<T>() / nt;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for s in &samples {
        sxy = sxy + (s.t - tm) * (s.phase - pm);
        sxx = sxx + (s.t - tm) * (s.t - tm);
    }
    let phase_speed = -(sxy / sxx) / kx;

    let (mut num, mut den) = (T::zero(), T::zero());
    for (i, c) in state.cells.iter().enumerate() {
        let ex = exact(state.t, grid.x(i)).expect("validated");
        num = num + (c[0] - ex.eps).powi(2) + (c[2] - ex.e[0]).powi(2);
        den = den + ex.eps * ex.eps + ex.e[0] * ex.e[0];
    }
    Ok(PlaneWaveOutput {
        grid,
        samples,
        phase_speed,
        shape_error: (num / den).sqrt(),
        b_ratio: if e_max > T::zero() { b_max / e_max } else { b_max },
        final_state: state,
    })
}

/// Standing waves of a single sector with mass coupling, one run per wavenumber.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct DispersionRun<T> {
    pub length: T,
    pub n: usize,
    pub cfl: T,
    /// Mode numbers; the wavenumber is `2πm/length`.
    pub modes: Vec<usize>,
    /// Run length in periods of the slowest mode.
    pub periods: T,
}

impl<T: Real> Default for DispersionRun<T> {
    fn default() -> Self {
        Self { length: T::two() * T::PI(), n: 256, cfl: T::of(0.8), modes: vec![1, 2, 3, 4, 5], periods: T::of(20.0) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DispersionPoint<T> {
    pub k: T,
    pub omega_measured: T,
    pub omega_expected: T,
    /// Relative error in ω².
    pub rel_error: T,
}

#[derive(Clone, Debug)]
pub struct DispersionOutput<T> {
    pub points: Vec<DispersionPoint<T>>,
    /// Per mode, the sampled amplitude of the ε mode against time.
    pub traces: Vec<Vec<(T, T)>>,
}

/// Frequency of the strongest spectral line of a uniformly sampled real signal, using a
/// Hann window, eightfold zero padding and parabolic interpolation of the log magnitude.
pub fn peak_frequency<T: Real>(signal: &[T], dt: T) -> T {
    let n = signal.len();
    let padded = 8 * n.next_power_of_two();
    let mut buf: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); padded];
    let mean = signal.iter().map(|x| x.f64()).sum::<f64>() / n as f64;
    for (j, x) in signal.iter().enumerate() {
        let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * j as f64 / (n - 1) as f64).cos();
        buf[j] = Complex::new((x.f64() - mean) * w, 0.0);
    }
    let mut planner = rustfft::FftPlanner::new();
    planner.plan_fft_forward(padded).process(&mut buf);
    let mag: Vec<f64> = buf[..padded / 2].iter().map(|c| c.norm()).collect();
    let i = (1..mag.len() - 1)
        .max_by(|&a, &b| mag[a].partial_cmp(&mag[b]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(1);
    let (a, b, c) = (mag[i - 1].ln(), mag[i].ln(), mag[i + 1].ln());
    let denom = a - 2.0 * b + c;
    let offset = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    let freq = (i as f64 + offset) / (padded as f64 * dt.f64());
    T::of(2.0 * std::f64::consts::PI * freq)
}

pub fn run_dispersion<T: Real>(cfg: &DispersionRun<T>, u: &Units<T>) -> Result<DispersionOutput<T>> {
    if u.kappa == T::zero() {
        return Err(Error::config("units.kappa", "the dispersion run needs kappa != 0"));
    }
    if cfg.modes.is_empty() || cfg.modes.contains(&0) {
        return Err(Error::config("modes", "need at least one positive mode number"));
    }
    if !(cfg.periods > T::zero()) {
        return Err(Error::config("periods", "must be positive"));
    }
    let grid = CartesianGrid::new(T::zero(), cfg.length, cfg.n, cfg.cfl, Boundary::Periodic, u)?;
    let solver = CartesianSolver::new(grid, *u)?;
    let wavenumber = |m: usize| T::two() * T::PI() * T::of(m as f64) / cfg.length;
    let omega_of = |k: T| u.c * (k * k + u.kappa * u.kappa).sqrt();
    let slowest = cfg.modes.iter().map(|&m| omega_of(wavenumber(m))).fold(T::infinity(), T::min);
    let t_end = cfg.periods * T::two() * T::PI() / slowest;
    let steps = (t_end / grid.dt).ceil().f64() as usize;

    let mut points = Vec::new();
    let mut traces = Vec::new();
    for &m in &cfg.modes {
        let k = wavenumber(m);
        let mut state = CartesianState1D::from_fn(&grid, T::zero(), |x| FieldPoint {
            eps: (k * x).cos(),
            ..FieldPoint::zero()
        });
        let mut trace = vec![(T::zero(), mode_amplitude(&state, 0, m).re)];
        for _ in 0..steps {
            solver.step(&mut state, &NoSources)?;
            trace.push((state.t, mode_amplitude(&state, 0, m).re));
        }
        let signal: Vec<T> = trace.iter().map(|p| p.1).collect();
        let omega_measured = peak_frequency(&signal, grid.dt);
        let omega_expected = omega_of(k);
        let rel_error = ((omega_measured * omega_measured) / (omega_expected * omega_expected) - T::one()).abs();
        points.push(DispersionPoint { k, omega_measured, omega_expected, rel_error });
        traces.push(trace);
    }
    Ok(DispersionOutput { points, traces })
}
