use thiserror::Error;

/// Errors surfaced by state, channel, and diagnostic operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit label collision: label {0} appears in both registers")]
    LabelCollision(u32),

    #[error("unknown qubit label {0}")]
    UnknownLabel(u32),

    #[error("register mismatch: expected {expected} qubits, got {got}")]
    RegisterMismatch { expected: usize, got: usize },

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("qubit cap exceeded: {requested} qubits, cap {cap}")]
    CapExceeded { requested: usize, cap: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("maximum-entropy completion did not converge: residual {residual:.3e} after {iterations} iterations")]
    MaxEntNonConvergence { residual: f64, iterations: usize },

    #[error("unsupported channel class: {0}")]
    UnsupportedChannelClass(String),

    #[error("calibration out of range: {0}")]
    CalibrationOutOfRange(String),

    #[error("linear program infeasible: {0}")]
    LpInfeasible(String),

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
