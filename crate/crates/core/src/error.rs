use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the estimation, simulation and benchmark routines.
#[derive(Debug, Error)]
pub enum CdspError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("need at least {min} bootstrap replicates, got {got}")]
    InsufficientReplicates { min: usize, got: usize },

    #[error("rank deficient design: {0}")]
    RankDeficient(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("missing metadata: {0}")]
    MissingMetadata(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Serialize(String),
}

impl CdspError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CdspError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the data rather than by malformed input.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            CdspError::Degenerate(_) | CdspError::RankDeficient(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, CdspError>;
