//! Closed-form energy bookkeeping for the charge creation cycle inside a charged cage:
//! create a charge at cage potential φ₁, carry it to potential φ₂, annihilate it, and bring
//! the neutral particle back.
//!
//! Every stage is a row of energy changes whose sum is zero. The cage is a single scalar
//! rest energy acted on through `qφ` at the charge location.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Units;
use crate::scalar::Real;
use crate::shell::{balance_ledger, ChargeMode, ShellSpec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleConfig<T> {
    /// Birth and annihilation transients. The mode is ignored.
    pub shell: ShellSpec<T>,
    /// Cage potential where the charge is created.
    pub phi1: T,
    /// Potential at the distant point where it is annihilated.
    pub phi2: T,
    /// Initial particle rest mass.
    pub m0: T,
    /// Initial cage rest mass.
    pub cage_m0: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Birth,
    Transport,
    Annihilation,
    Return,
    /// Sum over the whole cycle.
    Total,
}

impl Stage {
    pub fn label(self) -> &'static str {
        match self {
            Stage::Birth => "birth",
            Stage::Transport => "transport",
            Stage::Annihilation => "annihilation",
            Stage::Return => "return",
            Stage::Total => "total",
        }
    }
}

/// Energy changes during one stage. Work and radiation count what leaves the system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CycleEntry<T> {
    pub stage: Stage,
    pub particle_rest: T,
    pub cage_rest: T,
    pub coulomb_field: T,
    /// Charge–cage interaction energy `qφ`.
    pub interaction: T,
    pub work_extracted: T,
    pub radiated: T,
}

impl<T: Real> CycleEntry<T> {
    fn empty(stage: Stage) -> Self {
        Self {
            stage,
            particle_rest: T::zero(),
            cage_rest: T::zero(),
            coulomb_field: T::zero(),
            interaction: T::zero(),
            work_extracted: T::zero(),
            radiated: T::zero(),
        }
    }

    fn values(&self) -> [T; 6] {
        [self.particle_rest, self.cage_rest, self.coulomb_field, self.interaction, self.work_extracted, self.radiated]
    }

    /// Stored-energy changes plus outputs; zero when the stage conserves energy.
    pub fn imbalance(&self) -> T {
        self.values().iter().fold(T::zero(), |a, &v| a + v)
    }

    pub fn max_abs(&self) -> T {
        self.values().iter().fold(T::zero(), |a, &v| a.max(v.abs()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleLedger<T> {
    pub stages: Vec<CycleEntry<T>>,
    pub totals: CycleEntry<T>,
    /// Emitted at birth.
    pub w_rad_1: T,
    /// Emitted at annihilation.
    pub w_rad_2: T,
    /// Coulomb energy of the full charge outside the shell.
    pub w_coul: T,
    /// Loss of particle rest energy over the cycle.
    pub particle_deficit: T,
    /// Loss of cage rest energy over the cycle.
    pub cage_deficit: T,
    pub final_particle_mass: T,
    pub final_cage_mass: T,
    /// Net change of stored energy plus everything emitted or extracted; zero when the cycle
    /// neither creates nor destroys energy.
    pub residual: T,
}

impl<T: Real> CycleLedger<T> {
    pub fn relative_residual(&self) -> T {
        let scale = self.stages.iter().fold(T::zero(), |a, e| a.max(e.max_abs()));
        if scale == T::zero() {
            self.residual.abs()
        } else {
            self.residual.abs() / scale
        }
    }
}

fn check<T: Real>(cfg: &CycleConfig<T>) -> Result<()> {
    ShellSpec::new(cfg.shell.q0, cfg.shell.r0, cfg.shell.tau, cfg.shell.mode)?;
    for (key, v) in [("phi1", cfg.phi1), ("phi2", cfg.phi2)] {
        if !v.is_finite() {
            return Err(Error::config(key, "must be finite"));
        }
    }
    for (key, v) in [("m0", cfg.m0), ("cage_m0", cfg.cage_m0)] {
        if !(v >= T::zero() && v.is_finite()) {
            return Err(Error::config(key, "must be non-negative and finite"));
        }
    }
    Ok(())
}

pub fn run_cycle<T: Real>(cfg: &CycleConfig<T>, u: &Units<T>) -> Result<CycleLedger<T>> {
    check(cfg)?;
    let q = cfg.shell.q0;
    let growth = balance_ledger(&cfg.shell.with_mode(ChargeMode::Growth), T::infinity(), u)?;
    let decay = balance_ledger(&cfg.shell.with_mode(ChargeMode::Decay), T::infinity(), u)?;
    let w_coul = growth.w_coul;
    let (w_rad_1, w_rad_2) = (growth.w_rad, decay.w_rad);

    let birth = CycleEntry {
        particle_rest: -growth.delta_rest_energy,
        cage_rest: -q * cfg.phi1,
        coulomb_field: w_coul,
        interaction: q * cfg.phi1,
        radiated: w_rad_1,
        ..CycleEntry::empty(Stage::Birth)
    };
    let transport = CycleEntry {
        interaction: q * (cfg.phi2 - cfg.phi1),
        work_extracted: q * (cfg.phi1 - cfg.phi2),
        ..CycleEntry::empty(Stage::Transport)
    };
    let annihilation = CycleEntry {
        particle_rest: decay.delta_rest_energy,
        cage_rest: q * cfg.phi2,
        coulomb_field: -w_coul,
        interaction: -q * cfg.phi2,
        radiated: w_rad_2,
        ..CycleEntry::empty(Stage::Annihilation)
    };
    let stages = vec![birth, transport, annihilation, CycleEntry::empty(Stage::Return)];

    let c2 = u.c * u.c;
    let (mut particle, mut cage) = (cfg.m0 * c2, cfg.cage_m0 * c2);
    for e in &stages {
        particle = particle + e.particle_rest;
        cage = cage + e.cage_rest;
        if particle < T::zero() {
            return Err(Error::config("m0", format!("particle rest energy goes negative during {}", e.stage.label())));
        }
        if cage < T::zero() {
            return Err(Error::config("cage_m0", format!("cage rest energy goes negative during {}", e.stage.label())));
        }
    }

    let mut totals = CycleEntry::empty(Stage::Total);
    for e in &stages {
        totals.particle_rest = totals.particle_rest + e.particle_rest;
        totals.cage_rest = totals.cage_rest + e.cage_rest;
        totals.coulomb_field = totals.coulomb_field + e.coulomb_field;
        totals.interaction = totals.interaction + e.interaction;
        totals.work_extracted = totals.work_extracted + e.work_extracted;
        totals.radiated = totals.radiated + e.radiated;
    }
    let residual = totals.imbalance();

    Ok(CycleLedger {
        stages,
        totals,
        w_rad_1,
        w_rad_2,
        w_coul,
        particle_deficit: -totals.particle_rest,
        cage_deficit: -totals.cage_rest,
        final_particle_mass: particle / c2,
        final_cage_mass: cage / c2,
        residual,
    })
}
