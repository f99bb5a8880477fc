use thiserror::Error;

/// Errors raised by the numeric core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("empty sequence: {what}")]
    Empty { what: &'static str },

    /// A mapping between optimizer families has no valid image; `constraint`
    /// names the violated condition.
    #[error("infeasible mapping: {constraint}")]
    Infeasible { constraint: String },

    #[error("degenerate mapping: {0}")]
    Degenerate(String),

    #[error("history length {len} exceeds cap {cap}")]
    HistoryOverflow { len: usize, cap: usize },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn infeasible(constraint: impl Into<String>) -> Self {
        Error::Infeasible {
            constraint: constraint.into(),
        }
    }
}
