use thiserror::Error;

/// Errors raised by the simulation and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("expected a {expected} field, got a {found} field")]
    WrongKind {
        expected: &'static str,
        found: &'static str,
    },

    #[error("time {0} is outside the domain t > e^e where ln ln t > 0")]
    BelowLogLogDomain(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty sample")]
    EmptySample,

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
