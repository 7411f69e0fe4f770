use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("parse error in `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("road network is disconnected for {} cell pair(s), first: {:?}", .pairs.len(), .pairs.first())]
    Disconnected { pairs: Vec<(usize, usize)> },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("refusing to enumerate: {0}")]
    SizeGuard(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}
