use thiserror::Error;

/// Errors produced by the ranking engine and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RankError {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible constraints: {0}")]
    Infeasible(String),

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("instance too large for exhaustive search (m = {m}, n = {n}; limit m <= 10, n <= 6)")]
    SizeGuard { m: usize, n: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, RankError>;

pub(crate) fn invalid(msg: impl Into<String>) -> RankError {
    RankError::InvalidParameter(msg.into())
}

pub(crate) fn ensure_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(RankError::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}
