//! Casimir pressure between parallel half-spaces at finite temperature.
//!
//! The crate evaluates the Lifshitz formula as a Matsubara sum over imaginary
//! frequencies, with Drude, plasma, constant or tabulated permittivities, and
//! builds the temperature-difference observables used to compare against
//! experiment.
//!
//! ```no_run
//! use casimir_core::dispersion::material_preset;
//! use casimir_core::lifshitz::{casimir_pressure, PlateSystem, SolverOptions, ThermalState};
//!
//! let au = material_preset("Au").unwrap();
//! let system = PlateSystem::new(au.clone(), au, 1e-6).unwrap();
//! let thermal = ThermalState::new(300.0).unwrap();
//! let result = casimir_pressure(&system, &thermal, &SolverOptions::default()).unwrap();
//! println!("{:.3} mPa", result.magnitude() * 1e3);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constants;
pub mod dispersion;
mod exec;
pub mod lifshitz;
pub mod quadrature;
pub mod scenarios;
pub mod special;
pub mod summation;

pub use exec::parallel_available;
