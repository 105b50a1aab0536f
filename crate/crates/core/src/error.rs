use thiserror::Error;

use crate::grid::Grid;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: expected {expected}, got {got}")]
    GridMismatch { expected: Grid, got: Grid },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("time step dt = {dt} violates the advective CFL bound {bound}")]
    Cfl { dt: f64, bound: f64 },

    #[error("solution blew up at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error("non-monotone time: report is at t = {prev}, new sample at t = {new}")]
    NonMonotoneTime { prev: f64, new: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
