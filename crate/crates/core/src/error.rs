use thiserror::Error;

/// Errors raised by the estimators, samplers and solvers in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("invalid point set: {0}")]
    InvalidPointSet(String),

    #[error("too many points for brute-force oracle: {got} > {max}")]
    TooManyPoints { got: usize, max: usize },

    #[error("negative level: {0}")]
    NegativeLevel(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("asymptotic valid for z → ∞ only (got z = {0})")]
    AsymptoticDomain(f64),

    #[error("solver did not converge after {iterations} iterations (max violation {max_violation:e}, energy change {energy_change:e})")]
    NonConvergence {
        iterations: usize,
        max_violation: f64,
        energy_change: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
