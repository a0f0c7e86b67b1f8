use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {reason}")]
    MalformedLine { line: u64, reason: String },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("invalid hyperparameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("feature count mismatch: model expects {expected}, input has {actual}")]
    FeatureMismatch { expected: usize, actual: usize },

    #[error("non-positive denominator {0} (H + lambda must be > 0)")]
    NonPositiveDenominator(f64),

    #[error("{0}")]
    InvalidInput(String),

    #[error("model format: {0}")]
    ModelFormat(String),

    #[error("grid: {0}")]
    Grid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
