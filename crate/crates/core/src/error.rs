use sharpbound_lp::LpError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cannot parse input: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("specification rejected: {}", .0.join("; "))]
    InvalidSpec(Vec<String>),
    #[error("lattice has {size} points, above the cap of {cap}")]
    LatticeTooLarge { size: String, cap: usize },
    #[error("ambiguity set is empty: {0}")]
    Infeasible(String),
    #[error("problem is unbounded: {0}")]
    Unbounded(String),
    #[error("cut limit of {0} reached before the separation oracle certified optimality")]
    CutLimit(usize),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

pub type Result<T> = std::result::Result<T, Error>;
