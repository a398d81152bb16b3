use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed record: {message}")]
    Parse { line: usize, message: String },

    #[error("record `{id}`{}: {reason}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Validation {
        id: String,
        line: Option<usize>,
        reason: String,
    },

    #[error("window size {w} exceeds sequence length {n}")]
    WindowTooLarge { w: usize, n: usize },

    #[error("record `{id}` (length {n}) is shorter than every window in the schedule")]
    NoUsableWindow { id: String, n: usize },

    #[error("record `{id}`: mean reference loss {mean} is not positive")]
    DegenerateReference { id: String, mean: f64 },

    #[error("no record could be scored ({failures} failures)")]
    NothingScoreable { failures: usize },

    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("evaluation requires both members and non-members (got {members} members, {nonmembers} non-members)")]
    SingleClass { members: usize, nonmembers: usize },

    #[error("evaluation requires labeled records; `{id}` has label `unknown`")]
    Unlabeled { id: String },

    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("need at least 2 extreme events, found {found}")]
    InsufficientEvents { found: usize },

    #[error("analysis not applicable: {0}")]
    AnalysisInapplicable(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => 1,
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::Validation { .. }
            | Error::WindowTooLarge { .. }
            | Error::NoUsableWindow { .. }
            | Error::DegenerateReference { .. }
            | Error::NothingScoreable { .. }
            | Error::Csv { .. }
            | Error::Json(_) => 2,
            Error::SingleClass { .. }
            | Error::Unlabeled { .. }
            | Error::Degenerate(_)
            | Error::InsufficientEvents { .. }
            | Error::AnalysisInapplicable(_) => 3,
        }
    }
}
