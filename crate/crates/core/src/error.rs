use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("argument {value} outside the domain of {op}")]
    Domain { op: &'static str, value: f64 },

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    /// Too few observed failures to identify both shape parameters.
    #[error("degenerate sample: {observed} observed failures, at least {required} required")]
    DegenerateSample { observed: usize, required: usize },

    #[error("{method} did not converge after {iterations} iterations")]
    NoConvergence {
        method: &'static str,
        iterations: usize,
    },

    #[error("M-step diverged at theta = {theta}, alpha = {alpha}")]
    Divergence { theta: f64, alpha: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("information matrix is not positive definite (det = {det})")]
    NotPositiveDefinite { det: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
