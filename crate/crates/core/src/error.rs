use thiserror::Error;

use crate::numerics::QuadratureError;

/// Errors surfaced by the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CbsError {
    /// A parameter violates a type invariant (negative density, empty grid, ...).
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A special function was evaluated outside its domain.
    #[error("{function} is undefined at x = {x}")]
    Domain { function: &'static str, x: f64 },

    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

impl CbsError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        CbsError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True when the failure is numerical rather than a bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, CbsError::Quadrature(_))
    }
}

pub type Result<T> = std::result::Result<T, CbsError>;
