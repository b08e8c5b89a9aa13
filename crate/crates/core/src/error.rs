use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("virtual value undefined at v = {0} (zero density)")]
    UndefinedVirtualValue(f64),
    #[error("value {0} is not a support point")]
    NotInSupport(f64),
    #[error("virtual value is negative everywhere; no reserve price")]
    NoReserve,
    #[error("quantile {0} is outside the admissible range")]
    QuantileOutOfRange(f64),
    #[error("truncation point {point} lies below the support minimum {min}")]
    TruncationBelowSupport { point: f64, min: f64 },
    #[error("operation needs a discrete distribution")]
    NotDiscrete,
    #[error("empty support")]
    EmptySupport,
    #[error("every sample was discarded")]
    InsufficientSamples,
    #[error("simplex exceeded {0} iterations")]
    IterationLimit(usize),
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
