use std::io;

use thiserror::Error;

/// Errors produced anywhere in the forecasting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A CSV or model-file line could not be parsed.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A quote violated a market invariant (bid < ask, positive prices).
    #[error("line {line}: {message}")]
    Validation { line: usize, message: String },

    /// A caller-supplied argument or hyperparameter is out of range.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Feature vector length does not match the model or dataset schema.
    #[error("schema mismatch: expected {expected} features, got {found}")]
    SchemaMismatch { expected: usize, found: usize },

    /// The iterative solver hit its iteration cap before reaching tolerance.
    #[error(
        "solver did not converge after {iterations} iterations (relative residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
