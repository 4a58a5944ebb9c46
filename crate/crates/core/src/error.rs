use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input: malformed parameters, violated preconditions.
    Config,
    /// A computation failed or produced an unusable result.
    Numerical,
    /// A configured limit (mode cap, truncation budget, IO) was hit.
    Resource,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("imaginary frequency: eigenvalue {lambda:e} at index {index} is negative")]
    ImaginaryFrequency { index: usize, lambda: f64 },

    #[error("uv validity: requested {requested} modes but a grid of {grid_points} points only trusts {limit}")]
    UvValidity {
        requested: usize,
        grid_points: usize,
        limit: usize,
    },

    #[error("resource limit: enumeration exceeds the mode cap of {cap} entries")]
    ResourceLimit { cap: usize },

    #[error(
        "truncation: largest trusted frequency {available:e} is below the required {required:e}; \
         about {required_modes} modes are needed"
    )]
    Truncation {
        available: f64,
        required: f64,
        required_modes: usize,
    },

    #[error("truncation: heat trace at t = {t:e} needs more modes; the smallest usable t is {min_t:e}")]
    HeatTruncation { t: f64, min_t: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("ill-conditioned fit (condition number {condition:e}): {suggestion}")]
    Conditioning { condition: f64, suggestion: String },

    #[error("non-convergence: {0}")]
    NonConvergence(String),

    #[error("unsupported cutoff: {0}")]
    UnsupportedCutoff(String),

    #[error("invalid cutoff: {0}")]
    InvalidCutoff(String),

    #[error("divergent moment: the integrand of the power-{power} moment does not decay")]
    DivergentMoment { power: i32 },

    #[error("derivative provider failed at order {order}, s = {point:e}: {message}")]
    Derivative {
        order: u32,
        point: f64,
        message: String,
    },

    #[error("invalid comparison: {0}")]
    InvalidComparison(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidArgument(_)
            | Error::UvValidity { .. }
            | Error::UnsupportedCutoff(_)
            | Error::InvalidCutoff(_)
            | Error::InvalidComparison(_)
            | Error::Parse { .. } => ErrorClass::Config,
            Error::ImaginaryFrequency { .. }
            | Error::NumericalFailure(_)
            | Error::Conditioning { .. }
            | Error::NonConvergence(_)
            | Error::DivergentMoment { .. }
            | Error::Derivative { .. } => ErrorClass::Numerical,
            Error::ResourceLimit { .. }
            | Error::Truncation { .. }
            | Error::HeatTruncation { .. }
            | Error::Io { .. } => {
                ErrorClass::Resource
            }
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
