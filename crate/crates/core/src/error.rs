use thiserror::Error;

/// Errors raised anywhere in the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite even with ridge {max_ridge:e}")]
    NotPositiveDefinite { max_ridge: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in input")]
    NonFinite,

    #[error("empty data")]
    EmptyData,

    #[error("requested {components} components for {samples} samples")]
    TooManyComponents { components: usize, samples: usize },

    #[error("effective sample size {effective_n} too small for dimension {dim}")]
    InsufficientSampleSize { effective_n: usize, dim: usize },

    #[error("too few instances: got {got}, need {need}")]
    TooFewInstances { got: usize, need: usize },

    #[error("rejection sampler starved: {accepted} of {target} accepted after {attempts} draws")]
    AcceptanceStarvation {
        target: usize,
        accepted: usize,
        attempts: usize,
    },

    #[error("too few minority instances: got {got}, need {need}")]
    TooFewMinority { got: usize, need: usize },

    #[error("only one class present")]
    SingleClass,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("confusion counts are empty")]
    EmptyCounts,

    #[error("class with {count} members cannot fill {folds} folds")]
    ClassTooSmall { count: usize, folds: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
