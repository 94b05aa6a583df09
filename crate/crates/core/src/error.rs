use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid vote: {0}")]
    InvalidVote(String),

    #[error("ballot type mismatch: rule expects {expected} ballots, got {got}")]
    BallotMismatch {
        expected: &'static str,
        got: &'static str,
    },

    #[error("invalid committee: {0}")]
    InvalidCommittee(String),

    #[error("invalid score vector: {0}")]
    InvalidScoreVector(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// An exhaustive search was asked to run beyond the size it is built for.
    #[error("instance too large for exhaustive search: {0}")]
    Scale(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// Re-anchors a parse error at `line`; other errors pass through.
    pub(crate) fn at_line(self, line: usize) -> Self {
        match self {
            Error::Parse { msg, .. } => Error::Parse { line, msg },
            other => other,
        }
    }
}
