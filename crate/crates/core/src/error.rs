use alloc::string::String;
use core::fmt;

/// Errors from constructors and solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A precondition on an argument was violated.
    InvalidArgument(String),
    /// Vector/matrix dimensions do not agree.
    DimensionMismatch { expected: usize, got: usize },
    /// The augmented dynamics have spectral radius >= 1; no stationary
    /// covariance exists.
    UnstableSystem { spectral_radius: f64 },
    /// `optimal_alpha` found neither a sign change nor a plateau.
    NoOptimum(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::UnstableSystem { spectral_radius } => {
                write!(f, "unstable system: spectral radius {spectral_radius} >= 1")
            }
            Error::NoOptimum(msg) => write!(f, "no optimum: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
