use thiserror::Error;

pub type Result<T> = std::result::Result<T, SpgError>;

#[derive(Debug, Error)]
pub enum SpgError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("oracle budget exceeded: {required} paths needed, budget is {budget}")]
    OracleBudget { required: u128, budget: u128 },

    #[error("gradient estimate is exactly zero")]
    ZeroGradient,

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl SpgError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        SpgError::Config(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        SpgError::Precondition(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        SpgError::Numeric(msg.into())
    }
}
