use std::fmt;

use thiserror::Error;

use crate::gp_validation::{EtaField, GammaRow};
use crate::profile_solver::SurfaceTensionResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs have inconsistent shapes (field lengths vs. grid).
    #[error("structural error: {0}")]
    Structural(String),

    /// The profile solver hit its iteration cap; the best iterate is attached.
    #[error("solver did not converge after {iterations} iterations (projected gradient {grad_norm:.3e})")]
    NotConverged {
        iterations: usize,
        grad_norm: f64,
        best: Box<SurfaceTensionResult>,
    },

    /// The ground-state solver missed its residual target; the best field is attached.
    #[error("ground state did not converge after {iterations} iterations (residual {residual:.3e})")]
    GroundState {
        iterations: usize,
        residual: f64,
        best: Box<EtaField>,
    },

    /// The constrained ε-minimization missed the mass tolerance; the best row is attached.
    #[error("mass constraints not met at eps = {eps} (residuals {mass_res_1:.3e}, {mass_res_2:.3e})")]
    Constraint {
        eps: f64,
        mass_res_1: f64,
        mass_res_2: f64,
        best: Box<GammaRow>,
    },

    /// A field solver failed to converge.
    #[error("{what} did not converge: {detail}")]
    Stalled { what: &'static str, detail: String },

    /// The operation degenerates on this input (e.g. v touching zero).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Some rows of a sweep failed; the surviving rows are kept.
    #[error("sweep failed for beta = {failed:?}")]
    Sweep {
        partial: crate::asymptotics::SweepTable,
        failed: Vec<f64>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl fmt::Debug for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
