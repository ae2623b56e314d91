use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] codid_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Io { .. } => "io.error",
            CliError::MissingColumn(_) => "panel.missing_column",
            CliError::Parse { .. } => "panel.parse_error",
            CliError::Csv(_) => "panel.csv_error",
            CliError::Json(_) => "spec.json_error",
            CliError::Usage(_) => "cli.usage",
        }
    }

    /// Exit status: 2 for invalid input, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        let validation = match self {
            CliError::Core(e) => e.is_validation(),
            CliError::Io { .. } => false,
            _ => true,
        };
        if validation {
            2
        } else {
            1
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
