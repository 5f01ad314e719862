use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degree {degree} outside 0..={max}")]
    DegreeOutOfRange { degree: usize, max: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("infeasible parameters: J_{index}^2 = {value:e} is not positive")]
    Infeasible { index: usize, value: f64 },

    #[error("spectrum not strictly increasing at position {index}")]
    NotIncreasing { index: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("size {value} exceeds cap {cap} for {what}")]
    CapExceeded { what: &'static str, value: usize, cap: usize },

    #[error("singular parametrization: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
