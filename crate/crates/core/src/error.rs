use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid interval layout: {0}")]
    InvalidLayout(String),
    #[error("output width m={m} exceeds input width n={n}")]
    Width { n: u32, m: u32 },
    #[error("malformed rational {0:?}")]
    Rational(String),
    #[error("enumeration budget exceeded: {needed} branches > {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("prefix has zero probability")]
    ZeroProbabilityPrefix,
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
