use thiserror::Error;

#[derive(Debug, Error)]
pub enum NodalError {
    #[error("invalid mode ({m}, {n}): need m > n >= 1")]
    InvalidMode { m: u64, n: u64 },

    #[error("mode ({m}, {n}) tiles; reduce it first")]
    TilingMode { m: u64, n: u64 },

    #[error("eigenvalue cutoff {0} is below the ground state 5")]
    CutoffTooSmall(u64),

    #[error("eigenvalue cutoff {0} exceeds 2^62")]
    CutoffTooLarge(u64),

    #[error("expected a positive value, got {0}")]
    NonPositive(f64),

    #[error("recursion reached unreachable branch at (n={n}, k={k}, l={l})")]
    UnreachableBranch { n: u64, k: u64, l: u64 },

    #[error("recursion exceeded {0} steps")]
    RecursionDepth(usize),

    #[error("integer overflow while evaluating ({0})")]
    Overflow(&'static str),

    #[error("cell {cell} of mode ({m}, {n}): {reason}")]
    CellAssertion {
        m: u64,
        n: u64,
        cell: usize,
        reason: String,
    },

    #[error("sign of phi at {0} could not be certified")]
    UncertifiedSign(String),

    #[error("unknown export format {0:?}")]
    UnknownFormat(String),

    #[error("empty window [{low}, {high}]")]
    EmptyWindow { low: u64, high: u64 },

    #[error("window [{low}, {high}] exceeds sequence cutoff {max}")]
    WindowOutOfRange { low: u64, high: u64, max: u64 },

    #[error("grid up to {requested} exceeds sequence coverage {available}")]
    GridOutOfRange { requested: u64, available: u64 },

    #[error("ill-conditioned polynomial fit (condition number {0:e})")]
    IllConditioned(f64),

    #[error("{0}")]
    InvalidParameter(String),

    #[error("oracle did not converge for ({m}, {n}) up to resolution {resolution}")]
    NoConvergence { m: u64, n: u64, resolution: u64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, NodalError>;
