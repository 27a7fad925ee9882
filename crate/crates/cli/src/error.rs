use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {}", .0.display(), .1)]
    Io(PathBuf, #[source] std::io::Error),

    #[error(transparent)]
    Core(#[from] hybridplan::Error),

    #[error("cached artifact {} is unreadable: {}", .0.display(), .1)]
    Cache(PathBuf, String),

    #[error("cannot encode report: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
