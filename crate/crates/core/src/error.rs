use thiserror::Error;

/// Errors raised by the cohomology engine.
///
/// `IntegralityViolation` and `InternalInconsistency` indicate a bug in the
/// engine (or an unhandled erratum) rather than bad user input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-integral coefficient {coeff} on term {term}")]
    IntegralityViolation { term: String, coeff: String },

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("verification failure: {0}")]
    VerificationFailure(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
