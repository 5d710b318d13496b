use thiserror::Error;

/// Errors raised by the model, Fisher, estimator and oracle layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("angle {0} is outside the open interval (0, pi/2)")]
    AngleOutOfRange(f64),

    #[error("amplitude {0} is outside the open interval (0, 1)")]
    AmplitudeOutOfRange(f64),

    #[error("depolarizing parameter r = {0} must lie in (0, 1]")]
    InvalidSurvival(f64),

    #[error("readout error eps = {0} must lie in [0, 1)")]
    InvalidReadoutError(f64),

    #[error("invalid system size: {0}")]
    InvalidSystemSize(String),

    #[error("query count {0} must be a finite non-negative number")]
    InvalidQueryCount(f64),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid measurement record: {0}")]
    InvalidRecord(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{0} is not defined for this input")]
    Undefined(&'static str),

    #[error("no interior maximum: {0}")]
    NoInteriorPeak(String),

    #[error("likelihood is -inf on every grid point")]
    DegenerateLikelihood,

    #[error("oracle register too large: n = {0} (at most {1} data qubits)")]
    RegisterTooLarge(u32, u32),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
