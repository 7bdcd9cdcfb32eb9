use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rank deficient: vector {index} is (numerically) in the span of its predecessors")]
    RankDeficient { index: usize },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("support violation: coordinate {index} ({word}) leaves the action universe")]
    SupportViolation { index: usize, word: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
