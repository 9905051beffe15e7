use thiserror::Error;

/// Errors produced by the numerical and asymptotic routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no bracket found: {0}")]
    NoBracket(String),

    #[error("function is not monotone near x = {at}")]
    NotMonotone { at: f64 },

    #[error("derivative of Im V is not positive at x = {x} (value {value})")]
    DerivativeNonpositive { x: f64, value: f64 },

    #[error("limit of V1'/V2' could not be stabilized (oscillation {oscillation:e})")]
    LimitUnavailable { oscillation: f64 },

    #[error("regular-variation index beta is required for this potential")]
    BetaMissing,

    #[error("iteration did not converge after {iterations} steps")]
    NoConvergence { iterations: usize },

    #[error("refinement did not reach the requested tolerance (best value {best}, last change {last_change:e})")]
    NotConverged { best: f64, last_change: f64 },

    #[error("shift must be positive, got {0}")]
    MuNonpositive(f64),

    #[error("argument {0} is outside the domain")]
    OutOfDomain(f64),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("logarithm argument {argument} is not above e; leading-order level curve undefined")]
    LogDomain { argument: f64 },

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("horizon too small: reached {reached}, needed {target}")]
    HorizonTooSmall { reached: f64, target: f64 },

    #[error("value {value} lies outside the table range [{lo}, {hi}]")]
    OutOfTable { value: f64, lo: f64, hi: f64 },

    #[error("standing assumptions fail: {0}")]
    AssumptionsFailed(String),

    #[error("matrix is singular")]
    Singular,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
