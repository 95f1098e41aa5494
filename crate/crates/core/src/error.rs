use thiserror::Error;

use crate::report::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid groupoid: {0}")]
    InvalidGroupoid(ValidationReport),

    #[error("invalid group table: {0}")]
    InvalidGroup(String),

    #[error("invalid action: {0}")]
    InvalidAction(ValidationReport),

    #[error("invalid Fell bundle: {0}")]
    InvalidBundle(ValidationReport),

    #[error("action is not free: {witness}")]
    NotFree { witness: String },

    #[error("actions do not commute: {witness}")]
    NotCommuting { witness: String },

    #[error("actions are not covariant: {witness}")]
    NotCovariant { witness: String },

    #[error("side mismatch: expected a {expected} action")]
    SideMismatch { expected: &'static str },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal consistency: {0}")]
    Internal(String),

    #[error("equivalence verification failed: {0}")]
    EquivalenceFailed(ValidationReport),

    #[error("algebra is not a certified C*-algebra: {0}")]
    NotCStar(String),

    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unresolved reference `{name}` ({kind})")]
    Unresolved { name: String, kind: &'static str },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
