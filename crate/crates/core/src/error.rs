use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("symbol is not finite at frequency {frequency:?}")]
    NonFiniteSymbol { frequency: Vec<f64> },

    #[error("grids differ; arithmetic needs identical frequency grids")]
    GridMismatch,

    #[error("time sequence is not strictly decreasing at index {index}")]
    NotDecreasing { index: usize },

    #[error("time set is empty")]
    EmptySet,

    #[error("dyadic class A_{j} violates the fitted bound ({count} > {bound:.3})")]
    ProfileViolation { j: usize, count: usize, bound: f64 },

    #[error("dyadic class A_{j} is empty")]
    EmptyClass { j: usize },

    #[error("grid too coarse: {reason}")]
    Resolution { reason: String },

    #[error("resource budget exceeded: {reason}")]
    Budget { reason: String },

    #[error("radius {radius:e} is below the validity domain of the approximation (>= {min:e})")]
    OutsideValidity { radius: f64, min: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
