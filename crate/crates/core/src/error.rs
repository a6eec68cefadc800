use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid coupling distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("integration diverged at step {step} (t = {time}): non-finite value")]
    Diverged { step: usize, time: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unsupported distribution for this operation: {0}")]
    UnsupportedDistribution(String),

    #[error("degenerate population: {0}")]
    DegeneratePopulation(String),

    #[error("async threshold undefined: K_p == K_n leaves no dependence on p")]
    UndefinedThreshold,

    #[error("eigenvalue computation failed: {message}")]
    Numeric { message: String, matrix: Option<String> },

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
