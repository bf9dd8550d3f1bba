use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<atomlink::transfer::TransferError> for CliError {
    fn from(e: atomlink::transfer::TransferError) -> Self {
        use atomlink::transfer::TransferError as E;
        match e {
            E::InvalidParameter { .. } | E::InvalidSchedule | E::EmptyGrid => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<atomlink::scatter::ScatterError> for CliError {
    fn from(e: atomlink::scatter::ScatterError) -> Self {
        use atomlink::scatter::ScatterError as E;
        match e {
            E::SingularZeta { .. } | E::SingularStack { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<atomlink::storage::StorageError> for CliError {
    fn from(e: atomlink::storage::StorageError) -> Self {
        CliError::Config(e.to_string())
    }
}
