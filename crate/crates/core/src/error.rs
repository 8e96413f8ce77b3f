use thiserror::Error;

use crate::eigen::SpectrumResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("solver failure: {0}")]
    Solver(Box<SolverFailure>),

    #[error("format error: {0}")]
    Format(String),

    #[error("moments undefined: {0}")]
    Moments(String),

    #[error("preprocessing error: {0}")]
    Preprocessing(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Diagnostics from an eigensolver that stopped before meeting its contract.
#[derive(Debug)]
pub struct SolverFailure {
    pub message: String,
    pub iterations: usize,
    /// Best available pairs at the point of failure, if any were formed.
    pub partial: Option<SpectrumResult>,
}

impl std::fmt::Display for SolverFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} iterations)", self.message, self.iterations)
    }
}

impl Error {
    pub(crate) fn solver(message: impl Into<String>, iterations: usize, partial: Option<SpectrumResult>) -> Self {
        Error::Solver(Box::new(SolverFailure {
            message: message.into(),
            iterations,
            partial,
        }))
    }
}
