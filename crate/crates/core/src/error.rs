use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("need at least 2 observations, got {0}")]
    TooFewObservations(usize),

    #[error("need at least 1 predictor column")]
    NoPredictors,

    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid simulation design: {0}")]
    InvalidDesign(String),

    /// The restricted Gram matrix could not be factorized, even after jitter.
    #[error("singular system on support of size {size}")]
    SingularSystem { size: usize },
}
