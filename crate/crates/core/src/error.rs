use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or invalid input.
    Validation,
    /// The request is well formed but mathematically undefined
    /// (conditioning on a null event, vanishing chain product).
    Undefined,
    /// An internal consistency check failed.
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix must have dimension >= 1")]
    EmptyMatrix,
    #[error("malformed matrix: {0}")]
    Malformed(String),
    #[error("non-finite value in input")]
    NonFinite,
    #[error("operator is not self-adjoint (deviation {deviation:.3e})")]
    NotSelfAdjoint { deviation: f64 },
    #[error("operator is not idempotent (deviation {deviation:.3e})")]
    NotIdempotent { deviation: f64 },
    #[error("trace {trace} is not a non-negative integer")]
    NonIntegralTrace { trace: f64 },
    #[error("reference operator is numerically zero")]
    ZeroMatrix,
    #[error("vector is numerically zero")]
    ZeroVector,
    #[error("density operator has trace {trace}, expected 1")]
    NotNormalized { trace: f64 },
    #[error("density operator is not positive semidefinite (pivot {pivot:.3e})")]
    NotPositive { pivot: f64 },
    #[error("invalid weight {0}")]
    InvalidWeight(f64),
    #[error("conditioning event has probability {probability:.3e}, below the floor")]
    ZeroProbability { probability: f64 },
    #[error("operator product of the chain vanishes (trace {trace:.3e})")]
    VanishingProduct { trace: f64 },
    #[error("event chain is empty")]
    EmptyChain,
    #[error("event of rank {rank} is not minimal (rank 1 required)")]
    NotMinimal { rank: usize },
    #[error("events are not orthogonal")]
    NotOrthogonal,
    #[error("lattice meet did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid resolution: {0}")]
    InvalidResolution(String),
    #[error("instance too large: {count} events exceeds the limit of {limit}")]
    TooLarge { count: usize, limit: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("internal invariant breached: {0}")]
    InvariantBreach(String),
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::ZeroProbability { .. } | Error::VanishingProduct { .. } => ErrorKind::Undefined,
            Error::InvariantBreach(_) | Error::NonConvergence { .. } => ErrorKind::Internal,
            _ => ErrorKind::Validation,
        }
    }
}
