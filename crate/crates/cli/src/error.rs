use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// The inputs were read fine but the computation failed or the answer is negative.
    #[error("{0}")]
    Domain(String),
    /// Missing files, malformed files, bad arguments.
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }

    pub fn parse(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Input(_) => 2,
        }
    }
}

impl From<sheafbar::limits::LimitError> for CliError {
    fn from(e: sheafbar::limits::LimitError) -> Self {
        use sheafbar::limits::LimitError;
        match e {
            LimitError::Io { .. } | LimitError::Parse { .. } => CliError::Input(e.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}
