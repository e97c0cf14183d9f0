use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    Validation(String),
    #[error("point outside the domain: {0}")]
    Domain(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("{0}")]
    Classification(String),
    #[error("empty face")]
    EmptyFace,
    #[error("infeasible projection")]
    Infeasible,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
