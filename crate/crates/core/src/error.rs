use thiserror::Error;

/// Errors produced by the simulator and encoder.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FecamError {
    #[error("invalid write pulse: {0}")]
    InvalidPulse(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty match window: lower {lower} V >= upper {upper} V")]
    EmptyWindow { lower: f64, upper: f64 },
    #[error(
        "write disturb: unselected cell (row {row}, col {col}) sees |v_gs| = {v_gs:.3} V > {limit:.3} V"
    )]
    DisturbViolation {
        row: usize,
        col: usize,
        v_gs: f64,
        limit: f64,
    },
    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: String,
        got: usize,
        expected: usize,
    },
    #[error("inconsistent input: {0}")]
    InconsistentInput(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl FecamError {
    /// Short machine-readable category used by command-line front ends.
    pub fn category(&self) -> &'static str {
        match self {
            FecamError::InvalidPulse(_) => "invalid-pulse",
            FecamError::OutOfRange(_) => "out-of-range",
            FecamError::InvalidParameter(_) => "invalid-parameter",
            FecamError::EmptyWindow { .. } => "empty-window",
            FecamError::DisturbViolation { .. } => "disturb-violation",
            FecamError::DimensionMismatch { .. } => "dimension-mismatch",
            FecamError::InconsistentInput(_) => "inconsistent-input",
            FecamError::Parse { .. } => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, FecamError>;
