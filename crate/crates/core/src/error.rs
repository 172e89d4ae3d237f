//! Error type shared by every layer of the crate.

use thiserror::Error;

/// Errors raised by construction, parsing, evaluation and solving.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite coordinate at index {index}")]
    NonFiniteCoordinate { index: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },

    #[error("division guard tripped: |denominator| = {denominator:e} < 1e-15")]
    DivisionGuard { denominator: f64 },

    #[error("evaluation produced a non-finite value")]
    NonFiniteValue,

    #[error("map arity {arity} does not match point dimension {dimension}")]
    ArityMismatch { arity: usize, dimension: usize },

    #[error("contraction ratio h = {h} is not in [0, 1)")]
    RatioOutOfRange { h: f64 },

    #[error("{0}")]
    Problem(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
