use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug)]
pub enum Error {
    /// Malformed or out-of-range input.
    #[error("validation error: {0}")]
    Validation(String),

    /// A single-face frame without the pose or affect prediction strict mode requires.
    #[error("frame {frame}: {reason}")]
    IncompleteFrame { frame: u64, reason: String },

    /// The learner may not touch this lesson, session or test.
    #[error("access denied: {0}")]
    Access(String),

    #[error("not found: {0}")]
    NotFound(String),

    /// An operation needs recorded data that does not exist yet.
    #[error("no data: {0}")]
    NoData(String),

    /// A course fixture that breaks the course invariants.
    #[error("invalid course: {0}")]
    InvalidCourse(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("storage error: {0}")]
    Storage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
