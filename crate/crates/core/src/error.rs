use thiserror::Error;

/// Errors produced by the market model, solvers and mechanisms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("reservation utility {delta} cannot be met by PU {pu} / SU {su}")]
    InfeasibleReservation { pu: usize, su: usize, delta: f64 },

    #[error("PU utility {target} exceeds f(0) = {ceiling} for PU {pu} / SU {su}")]
    TargetUnreachable {
        pu: usize,
        su: usize,
        target: f64,
        ceiling: f64,
    },

    #[error("guess-based curve for PU {pu} / SU {su} has fewer than two usable samples")]
    DegenerateCurve { pu: usize, su: usize },

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("matchings do not share the same assignment")]
    AssignmentMismatch,

    #[error("no solution of the lower-bound function set for this assignment")]
    NoSolution,

    #[error("instance too large for exhaustive enumeration ({pus} PUs x {sus} SUs, limit 4 x 4)")]
    InstanceTooLarge { pus: usize, sus: usize },

    #[error("mechanism exceeded its round cap of {cap}")]
    IterationCapExceeded { cap: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
