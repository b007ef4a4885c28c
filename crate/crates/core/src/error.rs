use alloc::string::String;

use crate::point::Point;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point {point:?} lies outside the domain")]
    DomainViolation { point: Point },

    #[error("curve integral did not converge (last iterates {previous} and {last})")]
    Convergence { previous: f64, last: f64 },

    #[error("degenerate majorant: derivative {derivative} at t = {t}")]
    DegenerateMajorant { t: f64, derivative: f64 },

    #[error("no grid path between endpoints at resolution h = {h}")]
    Resolution { h: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("mapping has no derivative oracle")]
    MissingOracle,
}
