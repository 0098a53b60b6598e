//! Continuum solvation thermodynamics for ions in polar solvents.
//!
//! The crate computes Gibbs solvation free energies and entropies with three
//! spherical-ion models — the classical dielectric-cavity expression, its
//! mean-spherical-approximation correction, and a nonlinear
//! boundary-condition model whose field-dependent perturbation is calibrated
//! against the MSA — plus a boundary-element solver that carries the same
//! nonlinear boundary condition onto arbitrary triangulated surfaces.
//!
//! Modules:
//! - [`units`]: physical constants and the unit system (Å, e₀, kJ/mol).
//! - [`solvents`]: temperature-dependent dielectric laws and MSA shifts.
//! - [`ions`]: ion registry and reference-data tables.
//! - [`thermo`]: the three energy models, entropies, charging integrals.
//! - [`calibration`]: fitting the perturbation strength α(T) per solvent.
//! - [`bem`]: triangulated surfaces and the collocation solver.

pub mod bem;
pub mod calibration;
pub mod error;
pub mod ions;
pub mod solvents;
pub mod thermo;
pub mod units;

pub use error::{Error, Result};
pub use ions::IonSpec;
pub use solvents::SolventModel;
pub use thermo::{Model, ThermoResult};
pub use units::UnitSystem;
