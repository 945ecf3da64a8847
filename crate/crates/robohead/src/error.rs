use std::path::{Path, PathBuf};

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// A prerequisite artifact (features, model, transcript, ...) is absent.
    #[error("{artifact} not found: {}", path.display())]
    Missing { artifact: &'static str, path: PathBuf },
    #[error(transparent)]
    Core(#[from] robohead_core::Error),
    /// Unusable run configuration.
    #[error("{0}")]
    Config(String),
    /// Malformed data file or argument.
    #[error("{0}")]
    Input(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Missing { .. } => "missing-artifact",
            CliError::Core(_) | CliError::Input(_) => "invalid-input",
            CliError::Config(_) => "invalid-config",
            CliError::Io { .. } => "io",
        }
    }

    /// Machine-readable form printed on failure.
    pub fn record(&self) -> ErrorRecord {
        ErrorRecord {
            error: match self {
                CliError::Missing { artifact, .. } => format!("{artifact} not found"),
                other => other.kind().replace('-', " "),
            },
            kind: self.kind(),
            message: self.to_string(),
            path: match self {
                CliError::Missing { path, .. } | CliError::Io { path, .. } => Some(path.display().to_string()),
                _ => None,
            },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub error: String,
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

/// Fails with [`CliError::Missing`] unless `path` exists.
pub fn require(artifact: &'static str, path: &Path) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::Missing { artifact, path: path.to_path_buf() })
    }
}
