//! Error type shared by every module in the crate.

use thiserror::Error;

/// Unified error for data loading, preprocessing, model evaluation and
/// training. Variants map onto the failure classes the operations can hit:
/// malformed input text, ordering violations, domain/precondition
/// violations, shape mismatches, and numerical breakdown.
#[derive(Debug, Error)]
pub enum Error {
    /// A row or field could not be parsed (bad date, bad number, bad header).
    #[error("parse error: {0}")]
    Parse(String),

    /// A sequence that must be strictly increasing is not.
    #[error("ordering error: {0}")]
    Order(String),

    /// A value or argument violates a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Dimensions of matrices/vectors do not line up.
    #[error("shape error: {0}")]
    Shape(String),

    /// A numerical procedure broke down (singular system, non-finite result).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An underlying I/O operation failed.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True when the error signals numerical breakdown rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric(_))
    }
}
