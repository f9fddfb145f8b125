use thiserror::Error;

/// Errors raised by the dynamics, cycle and sweep routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid hyperparameters: {0}")]
    InvalidHyperParams(String),

    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    #[error("matrix is not positive definite (eigenvalue estimate {eigenvalue:e})")]
    NotPositiveDefinite { eigenvalue: f64 },

    #[error("zero denominator sqrt(v + eps) in component {component}")]
    ZeroDenominator { component: usize },

    #[error("non-finite map value when perturbing coordinate {coordinate}")]
    NonFiniteEvaluation { coordinate: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Newton system is singular (condition estimate {condition:e}, residual {residual:e})")]
    SingularNewtonSystem { condition: f64, residual: f64 },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonNotConverged { iterations: usize, residual: f64 },

    #[error("c = {c} coincides with the exceptional coefficient {c_hat}; continuation is not guaranteed")]
    ExceptionalCoefficient { c: f64, c_hat: f64 },

    #[error("unknown experiment preset `{0}`")]
    UnknownPreset(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
