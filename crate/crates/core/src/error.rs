use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("positive term list must be non-empty")]
    EmptyPositiveList,
    #[error("theta must be strictly positive, got {0}")]
    NonPositiveTheta(f64),
    #[error("degrees of freedom must be a positive integer")]
    NonIntegerDof,
    #[error("shift c = {c} must stay below min(theta) = {min_theta}")]
    ShiftTooLarge { c: f64, min_theta: f64 },
    #[error("integrand evaluated at or unusably close to a pole")]
    PoleEvaluation,
    #[error("quadrature did not converge: {0}")]
    NoConvergence(String),
    #[error("operation only defined for a positive combination (empty negative list)")]
    NotAPositiveCombination,
    #[error("route unavailable: {0}")]
    RouteUnavailable(String),
    #[error("saddle point out of range: {0}")]
    SaddleOutOfRange(String),
    #[error("duplicate rates: {0}")]
    DuplicateRates(String),
    #[error("theta0 = {0} outside the admissible range")]
    Theta0OutOfRange(f64),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
