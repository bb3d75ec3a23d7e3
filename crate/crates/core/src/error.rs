use thiserror::Error;

/// A single problem found while validating an instance file.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Index of the offending marginal, when the problem is local to one.
    pub marginal: Option<usize>,
    pub support: Vec<String>,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.marginal {
            Some(i) => write!(f, "marginal {} [{}]: {}", i, self.support.join(","), self.message),
            None => write!(f, "instance: {}", self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NonHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("trace is {0}, expected 1")]
    TraceMismatch(f64),

    #[error("state vector norm is {0}, expected 1")]
    NotNormalized(f64),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("partial trace needs at least one subsystem to keep")]
    EmptyKeepSet,

    #[error("eigen-solver did not converge")]
    ConvergenceFailure,

    #[error("layouts differ")]
    LayoutMismatch,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("marginals disagree on their shared subsystems (deviation {0:e})")]
    InconsistentInterface(f64),

    #[error("marginal supports do not fit the formula: {0}")]
    SupportMismatch(String),

    #[error("instance is not a nearest-neighbour chain: {0}")]
    NotAChain(String),

    #[error("instance is not a single-party instance: {0}")]
    NotSingleParty(String),

    #[error("affine marginal projection did not converge (residual {0:e})")]
    InnerConvergenceFailure(f64),

    #[error("solutions or report do not belong to this instance: {0}")]
    InstanceMismatch(String),

    #[error("rank {rank} is out of range for dimension {dim}")]
    BadRank { dim: usize, rank: usize },

    #[error("need at least two subsystems, got {0}")]
    TooFewSubsystems(usize),

    #[error("unknown builtin instance `{0}`")]
    UnknownBuiltin(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation failed:\n{}", .0.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    Validation(Vec<Violation>),
}

pub type Result<T> = std::result::Result<T, Error>;
