use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("normalized error undefined for zero tensor")]
    ZeroTensor,

    #[error("matrix is ill-conditioned (condition number {condition:e} exceeds {cap:e})")]
    IllConditioned { condition: f64, cap: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("invalid format: {0}")]
    Format(String),

    #[error("{stage} failed for {subject}: {message}")]
    Stage {
        stage: String,
        subject: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    /// True for errors caused by unreadable or inconsistent input data, as
    /// opposed to invalid configuration.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::InvalidRecord(_)
                | Error::Io(_)
                | Error::Csv(_)
                | Error::Format(_)
                | Error::ZeroTensor
                | Error::Stage { .. }
        )
    }
}
