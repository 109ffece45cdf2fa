//! Crate-wide error type.
//!
//! Numerical routines never clamp or silently repair bad inputs; anything
//! outside a function's stated domain comes back as an error.

use thiserror::Error;

/// Which no-arbitrage price bound was violated by an inversion target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSide {
    Lower,
    Upper,
}

impl std::fmt::Display for BoundSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundSide::Lower => write!(f, "lower"),
            BoundSide::Upper => write!(f, "upper"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the function's domain.
    #[error("invalid input: {message}")]
    InvalidInput { message: String },

    /// A forward-matching constraint cannot be satisfied.
    #[error("calibration failed: {message}")]
    Calibration { message: String },

    /// The inversion target sits at or outside a no-arbitrage price bound,
    /// so no implied volatility exists.
    #[error("no implied volatility: price {price} is at/outside the {side} bound {bound}")]
    NoSolution {
        price: f64,
        bound: f64,
        side: BoundSide,
    },

    /// An iterative method ran out of iterations.
    #[error("no convergence: {message} (residual {residual:e})")]
    Convergence { message: String, residual: f64 },

    /// Adaptive quadrature hit its subdivision budget; the achieved
    /// estimate and its error bound are preserved.
    #[error("quadrature subdivision limit reached: estimate {estimate} with error bound {error_bound:e}")]
    QuadratureLimit { estimate: f64, error_bound: f64 },

    /// Put-call parity produced a materially negative put, signalling
    /// inconsistent inputs.
    #[error("parity violation: implied put {value:e} at strike {strike} is negative")]
    ParityViolation { value: f64, strike: f64 },

    /// Every strike of a smile grid was skipped.
    #[error("empty smile curve: all {skipped} strikes were skipped")]
    EmptyCurve { skipped: usize },
}

impl Error {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput {
            message: message.into(),
        }
    }

    pub(crate) fn calibration(message: impl Into<String>) -> Self {
        Error::Calibration {
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Reject non-finite values with the argument name in the message.
pub(crate) fn ensure_finite(value: f64, name: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::invalid(format!(
            "{name} must be finite, got {value}"
        )))
    }
}

/// Reject values that are not strictly positive (or not finite).
pub(crate) fn ensure_positive(value: f64, name: &str) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}
