use thiserror::Error;

/// Failures raised by the numerical kernels and the model modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("integration diverged at t = {t}: state is no longer finite")]
    IntegrationDiverged { t: f64 },

    #[error("integration unstable at t = {t}: {quantity} off by {deviation:e}")]
    IntegrationUnstable {
        t: f64,
        quantity: &'static str,
        deviation: f64,
    },

    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error:e}")]
    QuadratureFailed { estimate: f64, error: f64 },

    #[error("no sign change on [{a}, {b}]")]
    Bracketing { a: f64, b: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("division by zero: {0} must be nonzero")]
    DivisionByZero(&'static str),

    #[error("wrong regime: {0}")]
    WrongRegime(&'static str),

    #[error("outside the domain: {0}")]
    Domain(&'static str),

    #[error("steady state not reached by t = {t}: residual {residual:e}")]
    SteadyStateNotReached { t: f64, residual: f64 },

    #[error("no crossover: {0}")]
    NoCrossover(&'static str),

    #[error("no skin localization: the rate asymmetry vanishes")]
    NoSkinEffect,

    #[error("shape mismatch: {0}")]
    Shape(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

/// Rejects NaN and negative values for a named rate-like quantity.
pub(crate) fn check_nonneg(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite and >= 0, got {value}")))
    }
}

pub(crate) fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite and > 0, got {value}")))
    }
}
