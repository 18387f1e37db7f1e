use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("template hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("infeasible template: {0}")]
    Infeasible(String),
    #[error("zero vector has no norming functional")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("quotient level {level} exhausts dimension {dim}")]
    DimensionExhausted { level: usize, dim: usize },
    #[error("empty sphere net")]
    EmptyNet,
    #[error("empty semi-biorthogonal system")]
    EmptySystem,
    #[error("invalid tile id: {0}")]
    InvalidTile(String),
    #[error("query outside net horizon rho = {rho}")]
    OutOfHorizon { rho: f64 },
    #[error("iteration cap {0} exceeded before convergence")]
    IterationCapExceeded(usize),
    #[error("no member point found in {0} proposals")]
    SamplingFailed(usize),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("construction failed: {0}")]
    ConstructionFailed(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
