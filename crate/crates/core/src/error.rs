use thiserror::Error;

/// Errors raised by the estimators and tests.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MintError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite coordinate at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("duplicate points at rows {0:?}")]
    DuplicatePoints(Vec<usize>),

    #[error("k must be ≤ n−1 (k = {k}, n = {n})")]
    KTooLarge { k: usize, n: usize },

    #[error("argument {0} outside the domain of the function")]
    DomainError(f64),

    #[error("weight support for k = {k}, d = {d} has {available} indices, need {needed}")]
    InfeasibleSupport {
        k: usize,
        d: usize,
        needed: usize,
        available: usize,
    },

    #[error("weight constraint matrix is ill-conditioned (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("sampler produces {got}-dimensional draws, Y-block has {expected} columns")]
    SamplerDimensionMismatch { expected: usize, got: usize },

    #[error("design matrix is singular or nearly so (condition number of XᵀX {0:.3e})")]
    SingularDesign(f64),

    #[error("residuals are identically zero; standardisation is undefined")]
    DegenerateResiduals,
}

pub type Result<T> = std::result::Result<T, MintError>;
