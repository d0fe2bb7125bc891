use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("magnetization sector Mz={mz} is empty for N={n} (need |Mz| <= N)")]
    EmptySector { n: usize, mz: i32 },

    #[error("invalid particle count N={0}")]
    InvalidSize(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigensolver did not converge after {iterations} matrix-vector products (best residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("{what}: size {size} exceeds the limit of {limit}")]
    SizeLimit {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("odd N={0}: N-body correlations vanish by magnetization symmetry, use an even chain length")]
    OddChain(usize),

    #[error("flat slice: the ratio has no peak along this cut")]
    FlatSlice,

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
