use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown experiment {0:?}")]
    UnknownExperiment(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Core(#[from] kausal_core::Error),

    #[error("report differs from golden in {file}:\n{diff}")]
    GoldenMismatch { file: String, diff: String },

    #[error("golden file missing: {}", .0.display())]
    GoldenMissing(PathBuf),

    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> CliError {
    CliError::InvalidConfig(msg.into())
}
