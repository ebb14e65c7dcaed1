//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by the estimators, solvers and constructions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LppError {
    /// An argument lies outside the documented domain of the operation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A configured work or memory budget was exhausted before the answer was certain.
    #[error("resource limit reached: {0}")]
    Resource(String),

    /// A series that must converge was found not to.
    #[error("divergent series: {0}")]
    Divergence(String),

    /// A linear solve or fixed-point iteration did not reach the requested accuracy.
    #[error("numeric failure: {message} (residual {residual:e})")]
    Numeric { message: String, residual: f64 },

    /// Two quantities that must agree by construction did not.
    #[error("internal consistency check failed: {0}")]
    Internal(String),

    /// The maximum-weight path is not unique, so its heaviest edge is ill defined.
    #[error("geodesic not unique: {0}")]
    GeodesicNotUnique(String),
}

/// Shorthand used throughout the crate.
pub type Result<T> = std::result::Result<T, LppError>;

pub(crate) fn invalid(msg: impl Into<String>) -> LppError {
    LppError::InvalidParameter(msg.into())
}

pub(crate) fn check_prob(p: f64, name: &str) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {p} is not a probability")))
    }
}
