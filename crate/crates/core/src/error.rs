//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by construction, decomposition, and checking routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("matrix is not Hermitian: deviation {deviation:.3e} exceeds tolerance {tolerance:.3e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error(
        "columns are not orthonormal: deviation {deviation:.3e} exceeds tolerance {tolerance:.3e}"
    )]
    NotOrthonormal { deviation: f64, tolerance: f64 },

    #[error("invalid shape {rows}x{cols}: {context}")]
    InvalidShape {
        rows: usize,
        cols: usize,
        context: &'static str,
    },

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("decomposition failed to converge within {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error(
        "rank-deficient input: smallest singular value {smallest:.3e} at cutoff {tolerance:.3e}"
    )]
    RankDeficient { smallest: f64, tolerance: f64 },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("capacity exceeded: {requested} nonzero angles but only {available} complement directions")]
    CapacityExceeded { requested: usize, available: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("reproduction failed: {0}")]
    Reproduction(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}
