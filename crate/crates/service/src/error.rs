use thiserror::Error;

pub type Result<T, E = ServiceError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Core(#[from] dpsig_core::Error),

    #[error("parse error at row {row}, column {column:?}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("column {0:?} not found")]
    MissingColumn(String),

    #[error("non-finite value at row {row}, column {column:?}")]
    NonFiniteValue { row: usize, column: String },

    #[error("unknown dataset {0}")]
    UnknownDataset(String),

    #[error("unknown session {0}")]
    UnknownSession(String),

    #[error("privacy budget exhausted: requested {requested}, remaining {remaining}")]
    BudgetExhausted { requested: f64, remaining: f64 },

    #[error("invalid budget {0}: must be positive and finite")]
    InvalidBudget(f64),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
