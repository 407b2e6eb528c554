//! Error types shared across the crate.

use thiserror::Error;

/// Violations of an operation's domain preconditions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("point coordinate {value} at index {index} lies outside [0, 1)")]
    PointOutOfRange { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("sample cloud is empty")]
    EmptyCloud,

    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("annulus half-width {rho} must be smaller than radius {r}")]
    AnnulusWiderThanRadius { r: f64, rho: f64 },

    #[error("count must be at least 1")]
    EmptyCount,

    #[error("checkpoint {0} outside the valid range [1, n]")]
    CheckpointOutOfRange(u64),

    #[error("checkpoints must be strictly increasing")]
    CheckpointsNotIncreasing,

    #[error("affine observation scale must be a nonzero integer, got {0}")]
    NonIntegerAffineScale(f64),
}

/// Failures of statistical estimation at runtime (exit code 1 in the CLI).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("insufficient resolved scales: fewer than 2 radii with nonzero counts")]
    InsufficientResolvedScales,

    #[error("plot needs at least 2 points, got {0}")]
    TooFewPlotPoints(usize),
}

/// Configuration and usage errors (exit code 2 in the CLI).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unknown system id {0:?}")]
    UnknownSystem(String),

    #[error("unknown observation id {0:?}")]
    UnknownObservation(String),

    #[error("invalid {field}: {message}")]
    InvalidField { field: String, message: String },

    #[error("{0}")]
    Malformed(String),
}

impl ConfigError {
    pub fn invalid(field: &str, message: impl Into<String>) -> Self {
        ConfigError::InvalidField {
            field: field.to_string(),
            message: message.into(),
        }
    }
}
