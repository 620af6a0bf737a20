use thiserror::Error;

/// Unified error type for the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("stream budget exhausted after {budget} steps while producing cell {cell}")]
    StreamBudget { cell: u64, budget: u64 },

    #[error("machine budget exhausted after {0} steps")]
    MachineBudget(u64),

    #[error("program kind mismatch: expected {expected}, got {got}")]
    KindMismatch { expected: &'static str, got: &'static str },

    #[error("instruction {instr} is not allowed in {kind} programs")]
    KindViolation { instr: &'static str, kind: &'static str },

    #[error("jump target {target} out of range (program length {len})")]
    BadLabel { target: u64, len: usize },

    #[error("oracle has no entry for machine index {0}")]
    OracleGap(u64),

    #[error("whitelist verdict for index {index} could not be evaluated: {reason}")]
    VerdictFailure { index: u64, reason: String },

    #[error("malformed monotone associate: {0}")]
    MalformedCode(String),

    #[error("name does not satisfy fast convergence at (n={n}, k={k})")]
    NotFastConverging { n: u64, k: u64 },

    #[error("value is not in the range of the representation: {0}")]
    NotInRange(String),

    #[error("contradictory jump bits: balls {0} and {1} are formally disjoint")]
    ContradictoryBits(u64, u64),

    #[error("search budget exhausted: {0}")]
    SearchBudget(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
