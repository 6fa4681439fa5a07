use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("search failed: {0}")]
    SearchFailure(String),

    #[error("schedule rejected at round {round} (agent {agent}): {reason}")]
    ScheduleRejected {
        round: u64,
        agent: usize,
        reason: String,
    },

    #[error("fault model violated at round {round} by agent {agent}: {reason}")]
    ConstraintViolation {
        round: u64,
        agent: usize,
        reason: String,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
