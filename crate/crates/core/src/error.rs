use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("block tables for B={block_bits} need {entries} entries, over the budget of {budget} (raise LCIS_TABLE_BUDGET)")]
    TableBudget {
        block_bits: u32,
        entries: u128,
        budget: u64,
    },

    #[error("block size B={0} is out of range")]
    BlockBits(u32),

    #[error("instance too large for {what}: {size} exceeds the limit {limit}")]
    SizeLimit {
        what: &'static str,
        size: u64,
        limit: u64,
    },

    #[error("parse error at line {line}, token {token}: {message}")]
    Parse {
        line: usize,
        token: usize,
        message: String,
    },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
