use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("{0} is not a prime power")]
    NotPrimePower(u64),

    #[error("field of order {order} exceeds the supported cap of {cap} elements")]
    FieldTooLarge { order: u64, cap: u64 },

    #[error("erasure pattern is empty")]
    EmptyPattern,

    #[error("column index {index} out of range for a frame with {n} columns")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("frame columns are not unit norm (max deviation {deviation:e})")]
    NotUnitNorm { deviation: f64 },

    #[error("vector is not unit norm (norm {norm})")]
    NotUnitVector { norm: f64 },

    #[error("survivor set is rank deficient")]
    RankDeficient,

    #[error("frame is not a sign matrix: {0}")]
    NotSignMatrix(String),

    #[error("search needs {patterns} patterns, above the work cap of {cap}")]
    WorkCapExceeded { patterns: u128, cap: u64 },

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
