//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by solvers, initializers, and generators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Non-finite value encountered inside an iterative solver.
    #[error("numeric failure at iteration {iteration}: {what}")]
    Numeric { iteration: usize, what: String },

    #[error(transparent)]
    Dataset(#[from] crate::datasets::DatasetError),
}

pub type Result<T> = std::result::Result<T, Error>;
