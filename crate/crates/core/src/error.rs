use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("epsilon {0} outside (0, 1]")]
    EpsOutOfRange(f64),
    #[error("log(1/eps)^q with q < 0 is singular at eps = 1")]
    LogPole,
    #[error("piecewise (idempotent-glued) expression not allowed here; split on the idempotents first")]
    Piecewise,
    #[error("invalid ladder: {0}")]
    InvalidLadder(String),
    #[error("family length {got} does not match ladder length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fewer than 4 usable points ({0}) for an order fit")]
    InsufficientPoints(usize),
    #[error("non-finite sample at ladder index {0}")]
    NonFinite(usize),
    #[error("ladder mismatch")]
    LadderMismatch,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("epsilon {0} is not on the ladder")]
    NotOnLadder(f64),
    #[error("internal set is empty at ladder index {0}")]
    EmptySet(usize),
    #[error("hyperfinite set is empty at ladder index {0}")]
    EmptyHyperfinite(usize),
    #[error("function undefined at point {point:?} (ladder index {index})")]
    UndefinedPoint { index: usize, point: Vec<f64> },
    #[error("overspill cap must be at least 1")]
    BadCap,
    #[error("scale expression parse error at column {col}: {msg}")]
    ScaleParse { col: usize, msg: String },
    #[error("invalid threshold configuration: {0}")]
    InvalidThresholds(String),
}
