use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex id {0}")]
    UnknownVertex(usize),
    #[error("tree has depth {available}, depth {requested} requested")]
    TooShallow { available: usize, requested: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("estimated size {estimated} exceeds the memory cap of {cap}")]
    MemoryCap { estimated: u128, cap: usize },
    #[error("flow assignment has {got} values, tree has {expected} vertices")]
    MissingFlow { got: usize, expected: usize },
    #[error("illegal protection: {0}")]
    IllegalMove(String),
    #[error("ray point depth budget of {0} exhausted")]
    DepthBudget(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
