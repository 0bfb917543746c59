use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no quantum-defect series for l = {l}, j = {j}")]
    MissingSeries { l: u32, j: f64 },

    #[error("invalid Rydberg level: {0}")]
    InvalidLevel(String),

    #[error("radial grid too short: |u| = {tail:.3e} of its peak at the outer boundary (r_max = {r_max:.1} a0)")]
    GridTooShort { r_max: f64, tail: f64 },

    #[error("invalid radial grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("basis would hold {size} states, above the capacity of {limit}")]
    Capacity { size: usize, limit: usize },

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("state {0} is not in the basis")]
    StateNotInBasis(String),

    #[error("integrator failed at t = {t:.6} us: {reason}")]
    Integrator { t: f64, reason: String },

    #[error("dark-state system is degenerate: all Rabi frequencies vanish")]
    DegenerateDarkSystem,

    #[error("dark space has unexpected dimension {dim} (singular values {singular_values:?})")]
    DarkRank { dim: usize, singular_values: Vec<f64> },

    #[error("trajectory record has no final state")]
    MissingFinalState,

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Whether the error stems from user input rather than from the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Io { .. }
                | Error::Json(_)
                | Error::MissingSeries { .. }
                | Error::InvalidLevel(_)
                | Error::InvalidParam(_)
        )
    }
}
