use thiserror::Error;

/// Errors produced by the numerical engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid potential profile: {0}")]
    InvalidProfile(String),

    #[error("static profile has no switch-off time")]
    NoSwitchOff,

    #[error("{operation}: {reason}")]
    Domain { operation: &'static str, reason: String },

    #[error("invalid quadrature settings: {0}")]
    InvalidQuadrature(String),

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {estimate:e}, error bound {error_bound:e})"
    )]
    QuadratureBudget {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    #[error("integrand is not finite at x = {at}")]
    NonFiniteIntegrand { at: f64 },

    #[error("ODE integration failed at t = {reached}: {reason}")]
    Integration { reached: f64, reason: String },

    #[error("root finder did not converge for mode index {index}")]
    RootNotConverged { index: usize },
}

impl Error {
    pub(crate) fn domain(operation: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            operation,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
