use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row} is not on the simplex: entries sum to {sum} (tolerance {tolerance:e})")]
    NotSimplex { row: usize, sum: f64, tolerance: f64 },

    #[error("row {row} has an invalid entry {value} at column {col}")]
    InvalidEntry { row: usize, col: usize, value: f64 },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("round index out of order: expected {expected}, found {found}")]
    RoundOutOfOrder { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("stream generation failed: {0}")]
    Generation(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: unsupported schema `{found}` (expected `{expected}`)")]
    Schema {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input (as opposed to broken internal state or IO).
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Internal(_) | Error::Io { .. })
    }
}
