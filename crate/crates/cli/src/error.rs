use std::path::PathBuf;

use mmw_core::{Error as ModelError, Violation};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration has {} problem(s):\n{}", .0.len(), list(.0))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn list(v: &[Violation]) -> String {
    v.iter()
        .map(|v| format!("  {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 0 success, 1 usage or validation, 2 numerical failure, 3 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Invalid(_) => 1,
            CliError::Model(ModelError::Numerical(_) | ModelError::Domain(_)) => 2,
            CliError::Model(_) => 1,
            CliError::Io { .. } => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
