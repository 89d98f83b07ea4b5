//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors produced by mesh generators, calculus operators and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} must be at least {min}, got {got}")]
    TooSmall {
        what: &'static str,
        min: usize,
        got: usize,
    },

    #[error("subdivision level {got} exceeds the cap of {max}")]
    SubdivisionCap { max: u32, got: u32 },

    #[error("mesh is not well-centered: {what}")]
    NotWellCentered { what: &'static str },

    #[error("{what} must be strictly positive, got {got}")]
    NonPositive { what: &'static str, got: f64 },

    #[error("degree {degree} is out of range for a complex of dimension {dim}")]
    InvalidDegree { degree: usize, dim: usize },

    #[error("exterior derivative is undefined on top-degree ({degree}) cochains")]
    TopDegree { degree: usize },

    #[error("codifferential is undefined on degree-zero cochains")]
    DegreeZero,

    #[error("cochain degrees differ: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("cochains belong to different complexes")]
    ComplexMismatch,

    #[error("cochain length {got} does not match the {expected} simplices of degree {degree}")]
    LengthMismatch {
        degree: usize,
        expected: usize,
        got: usize,
    },

    #[error("no spectral cache available for degree {degree}")]
    MissingCache { degree: usize },

    #[error("degree-{degree} complex has {size} simplices, over the dense-eigensolver cap of {cap}")]
    CacheTooLarge {
        degree: usize,
        size: usize,
        cap: usize,
    },

    #[error("singular spectral function applied to a cochain with kernel fraction {fraction:.3e}")]
    SingularOnKernel { fraction: f64 },

    #[error("time grid is not uniform (max deviation {deviation:.3e})")]
    NonUniformTimeGrid { deviation: f64 },

    #[error("time series must be strictly increasing in time")]
    NonMonotoneTimes,

    #[error("operation needs at least {need} time samples, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("data violates the constraint K\u{2020}f = 0: residual {residual:.3e} > tol {tol:.3e}")]
    ConstraintViolation { residual: f64, tol: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed file: {0}")]
    Format(String),
}

impl Error {
    /// Stable machine-readable code, used by the CLI error line.
    pub fn code(&self) -> &'static str {
        match self {
            Error::TooSmall { .. } => "too_small",
            Error::SubdivisionCap { .. } => "subdivision_cap",
            Error::NotWellCentered { .. } => "not_well_centered",
            Error::NonPositive { .. } => "non_positive",
            Error::InvalidDegree { .. } => "invalid_degree",
            Error::TopDegree { .. } => "top_degree",
            Error::DegreeZero => "degree_zero",
            Error::DegreeMismatch { .. } => "degree_mismatch",
            Error::ComplexMismatch => "complex_mismatch",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::MissingCache { .. } => "missing_cache",
            Error::CacheTooLarge { .. } => "cache_too_large",
            Error::SingularOnKernel { .. } => "singular_on_kernel",
            Error::NonUniformTimeGrid { .. } => "non_uniform_time_grid",
            Error::NonMonotoneTimes => "non_monotone_times",
            Error::TooFewSamples { .. } => "too_few_samples",
            Error::ConstraintViolation { .. } => "constraint_violation",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Format(_) => "format",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
