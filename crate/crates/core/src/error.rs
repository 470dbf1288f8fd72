use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("trajectory of length {len} is too short for lag {lag}")]
    TooShort { len: usize, lag: usize },

    #[error("data matrix has numerical rank zero")]
    RankZero,

    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("point {point:?} lies outside the dictionary domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("dictionary `{0}` cannot represent the coordinate functions exactly")]
    Unrepresentable(String),

    #[error("eigenvector matrix is singular (condition estimate {0:e})")]
    SingularEigenbasis(f64),

    #[error("coefficient vectors {i} and {j} are not C0-orthonormal (inner product {value})")]
    NotOrthonormal { i: usize, j: usize, value: f64 },

    #[error("drift is not finite at {0:?}")]
    NonFiniteDrift(Vec<f64>),

    #[error("mismatched provenance: {0}")]
    Provenance(String),

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
