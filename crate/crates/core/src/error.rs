use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty point set")]
    Empty,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("generator norm {norm} exceeds the declared bound {bound}")]
    BoundExceeded { norm: f64, bound: f64 },

    #[error("degenerate order: every generator is zero")]
    DegenerateOrder,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parameter point {point:?} lies outside the family domain")]
    OutOfDomain { point: Vec<f64> },

    #[error("no sequence stays inside the domain")]
    NoValidSequence,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
