use thiserror::Error;

use crate::rings::RingError;

/// Errors raised by the module, elimination, δ and cancellation layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("unsupported backend: {0}")]
    Unsupported(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("map is not well defined: {0}")]
    IllDefined(String),
    #[error("point {0} is not in the spectrum")]
    PointNotInSpectrum(String),
    #[error("hypothesis failure: {0}")]
    HypothesisFailure(String),
    #[error("precondition not verified: {0}")]
    PreconditionUnverified(String),
    #[error("witness invalid: {0}")]
    WitnessInvalid(String),
    #[error("oracle failure: {0}")]
    OracleFailure(String),
    #[error("inverse not found: {0}")]
    InverseNotFound(String),
    #[error("chooser returned a non-central unit")]
    ChooserReturnedNonCentralUnit,
    #[error("search cap exceeded; value is at least {lower_bound}")]
    CapExceeded { lower_bound: usize },
    #[error("internal verification failure: {0}")]
    VerificationFailure(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
