//! Extended Maxwell electrodynamics with scalar (ε) and pseudoscalar (β) companion fields,
//! describing processes in which electric charge is not conserved.
//!
//! Everything is generic over the floating-point scalar through [`Real`]; the `*64` and `*32`
//! aliases below fix the precision.

pub mod conservation;
pub mod error;
pub mod field;
pub mod gamma;
pub mod mms;
pub mod particle;
pub mod quadrature;
pub mod scalar;
pub mod scenario;
pub mod shell;
pub mod solver;
pub mod vec3;
pub mod verify;
pub mod wigner;

pub use error::{Error, Result};
pub use scalar::Real;
pub use vec3::Vec3;

pub type Units64 = field::Units<f64>;
pub type Units32 = field::Units<f32>;
pub type FieldPoint64 = field::FieldPoint<f64>;
pub type FieldPoint32 = field::FieldPoint<f32>;
pub type SourcePoint64 = field::SourcePoint<f64>;
pub type PotentialPoint64 = field::PotentialPoint<f64>;
pub type FieldJet64 = gamma::FieldJet<f64>;
pub type FieldJet32 = gamma::FieldJet<f32>;
pub type Hypercomplex64 = gamma::Hypercomplex<f64>;
pub type Hypercomplex32 = gamma::Hypercomplex<f32>;
pub type ShellSpec64 = shell::ShellSpec<f64>;
pub type ShellSpec32 = shell::ShellSpec<f32>;
pub type EnergyLedger64 = shell::EnergyLedger<f64>;
pub type RadialGrid64 = solver::radial::RadialGrid<f64>;
pub type RadialState64 = solver::radial::RadialState<f64>;
pub type CartesianGrid64 = solver::cartesian::CartesianGrid<f64>;
pub type CartesianState64 = solver::cartesian::CartesianState1D<f64>;
pub type ParticleState64 = particle::ParticleState<f64>;
pub type ParticleState32 = particle::ParticleState<f32>;
pub type CycleConfig64 = wigner::CycleConfig<f64>;
pub type CycleLedger64 = wigner::CycleLedger<f64>;
