use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A superlevel set `{|f| > λ}` with `λ > 0` has infinite measure.
    #[error("non-rearrangeable: superlevel set at level {level} has infinite measure")]
    NonRearrangeable { level: f64 },

    /// The cumulative integral lies under no line; the level function would need
    /// a limiting construction that is not implemented.
    #[error("requires limiting construction: {0}")]
    RequiresLimit(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An index hypothesis of an evaluator is violated.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("outside implemented regime: {0}")]
    Regime(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
