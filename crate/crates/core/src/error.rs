//! Error type shared by every module of the crate.

use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Filesystem access failed.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A row of an input file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Input data violates an invariant (non-positive price, duplicate
    /// date, non-finite feature, ...).
    #[error("invalid data: {0}")]
    Validation(String),

    /// An index or window fell outside the series.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// The series is too short for the requested task layout.
    #[error("series too short: need at least {needed} points, have {available}")]
    Capacity { needed: usize, available: usize },

    /// No rows were eligible for the dataset.
    #[error("dataset has no eligible rows")]
    EmptyDataset,

    /// Adjacent peak and trough share the same price, so the oscillator
    /// denominator vanishes.
    #[error("degenerate swing: peak and trough both at {0}")]
    DegenerateSwing(f64),

    /// Vector dimensions disagree.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// The dual solver ran out of iterations.
    #[error("solver did not converge after {iterations} iterations (KKT violation {violation:.3e})")]
    Convergence { iterations: usize, violation: f64 },

    /// Every grid point of a model selection failed.
    #[error("model selection failed: {0}")]
    Selection(String),

    /// A configuration value is unusable.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A statistical test was called outside its contract.
    #[error("statistics: {0}")]
    Stats(String),
}

impl Error {
    /// Process exit code used by the CLI: 3 for convergence failures,
    /// 2 for everything else (data/config problems). Usage errors exit
    /// with 1 before reaching the library.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Convergence { .. } => 3,
            _ => 2,
        }
    }
}
