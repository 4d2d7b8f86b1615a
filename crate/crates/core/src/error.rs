use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("derivative order {requested} exceeds the supported maximum of 2")]
    OrderTooHigh { requested: u8 },

    #[error("too many variables for forward differentiation: {0}")]
    TooManyVariables(usize),

    #[error("point lies on the singular locus of the field")]
    SingularPoint,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid multi-index {0:?}")]
    InvalidIndex(Vec<usize>),

    #[error("grade mismatch: {0}")]
    GradeMismatch(String),

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("superluminal velocity: |v| = {speed} >= c = {c}")]
    Superluminal { speed: f64, c: f64 },

    #[error("velocity composition hits the pole 1 + K u v = 0")]
    CompositionPole,

    #[error("step too large: drift {drift:.3e} exceeds guard {guard:.3e}")]
    StepTooLarge { drift: f64, guard: f64 },

    #[error("did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("grid too large for dense evolution: {n} > {cap}")]
    GridTooLarge { n: usize, cap: usize },

    #[error("kernel undersampled: phase step {phase_step:.3} rad per cell exceeds pi")]
    KernelUndersampled { phase_step: f64 },

    #[error("path-integral cutoff {cutoff} exceeds half the grid extent ({half})")]
    CutoffTooWide { cutoff: f64, half: f64 },

    #[error("boundary not fully specified: {0}")]
    UnspecifiedBoundary(String),

    #[error("singular matrix")]
    SingularMatrix,

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
