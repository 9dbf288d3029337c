use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VegasError {
    #[error("invalid domain on axis {axis}: [{lo}, {hi}]")]
    InvalidDomain { axis: usize, lo: f64, hi: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinate {value} on axis {axis} is outside [0, 1)")]
    PointOutOfRange { axis: usize, value: f64 },

    #[error("run {run} is outside the plan of {total} runs")]
    RunOutOfRange { run: u64, total: u64 },

    #[error("integrand returned {value} at {point:?}")]
    NonFiniteIntegrand { point: Vec<f64>, value: f64 },

    #[error("integrand failed at {point:?}: {message}")]
    IntegrandFailed { point: Vec<f64>, message: String },

    #[error("cube {cube} has {count} samples; at least 2 are required")]
    UndersampledCube { cube: usize, count: u64 },

    #[error("accumulator shapes differ")]
    ShapeMismatch,

    #[error("no iterations were included in the result")]
    NoIncludedIterations,

    #[error("zero-variance iterations disagree: {first} vs {second}")]
    ConflictingExactEstimates { first: f64, second: f64 },

    #[error("unknown integrand `{name}`; available: {}", available.join(", "))]
    UnknownIntegrand { name: String, available: Vec<String> },

    #[error("integration cancelled")]
    Cancelled,
}
