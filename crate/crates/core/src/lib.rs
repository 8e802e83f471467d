//! Surface tension of segregated two-component Bose-Einstein condensates.
//!
//! The crate computes the one-dimensional optimal transition energy σ̄_β
//! between the two pure phases, its closed-form bounds and asymptotics,
//! Thomas-Fermi geometry of the limit perimeter problem, and a desk-scale
//! check of the sharp-interface limit.

pub mod analytic;
pub mod asymptotics;
mod banded;
pub mod cli;
pub mod emit;
pub mod error;
pub mod functional;
pub mod gp_validation;
pub mod grid;
mod optim;
pub mod profile_solver;
pub mod tf_geometry;

pub use error::{Error, Result};
pub use functional::EnergyBreakdown;
pub use grid::Grid1D;
