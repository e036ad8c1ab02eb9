//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by dataset construction, the mixing engine, the
/// closed-form oracle, training, and metric computation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("no eligible partner for anchor {anchor} under {strategy:?}")]
    NoEligiblePartner {
        anchor: usize,
        strategy: crate::mixing::PairingStrategy,
    },

    #[error("covariance matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("rank-deficient design matrix")]
    RankDeficient,

    #[error("group ({domain},{label}) has no samples")]
    EmptyGroup { domain: usize, label: usize },

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
