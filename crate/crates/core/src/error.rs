use thiserror::Error;

/// Errors raised by the verification engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite component {value} in {what}")]
    NonFinite { what: &'static str, value: f64 },

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("expected {expected} components, got {got}")]
    WrongLength { expected: usize, got: usize },

    #[error("regrading is singular (det = {det})")]
    SingularRegrading { det: f64 },

    #[error("argument outside the domain of {form} solution: {reason}")]
    Domain { form: &'static str, reason: String },

    #[error("{0} is not defined for this classification")]
    WrongFamily(&'static str),

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("invalid sequence operation: {0}")]
    Sequence(String),

    #[error("missing amplitude entry for transition {from} -> {to} in interval {interval}")]
    MissingAmplitude { interval: usize, from: u32, to: u32 },

    #[error("invalid set-up: {0}")]
    Setup(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(tol))
    }
}
