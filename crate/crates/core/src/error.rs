use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("{rows} rows cannot fit {columns} coefficients (need at least {})", columns + 1)]
    TooFewRows { rows: usize, columns: usize },

    #[error("design is rank deficient (singular value ratio {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("residual variance is zero, t-statistic is undefined")]
    ZeroResidualVariance,

    #[error("coefficient index {index} out of range for {columns} columns")]
    IndexOutOfRange { index: usize, columns: usize },

    #[error("invalid row subset: {0}")]
    InvalidIndexSet(String),

    #[error("invalid partition count M={m} for {n} rows")]
    InvalidM { m: usize, n: usize },

    #[error("invalid privacy parameters: {0}")]
    InvalidParams(String),

    #[error("partitions too small: floor(n/M) = {per_subset} rows but {needed} are required")]
    PartitionTooSmall { per_subset: usize, needed: usize },

    #[error("regression on subset {subset} is rank deficient")]
    RankDeficientSubset { subset: usize },

    #[error("regression on subset {subset} has zero residual variance")]
    ZeroResidualVarianceSubset { subset: usize },

    #[error("alpha {alpha} is outside (0, 1) or too small for {n_mc} reference draws")]
    AlphaOutOfRange { alpha: f64, n_mc: usize },

    #[error("released statistic was produced with different parameters than the reference")]
    ParamsMismatch,

    #[error("no (M, a) combination has loss below {bound}")]
    NoFeasible { bound: f64 },

    #[error("{n_mc} Monte Carlo draws requested, at least {min} required")]
    TooFewDraws { n_mc: usize, min: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("reference cache: {0}")]
    Cache(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Cache(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Cache(e.to_string())
    }
}
