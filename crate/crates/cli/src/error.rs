use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad or incomplete configuration; exit code 2.
    #[error("config error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Compute {
        context: &'static str,
        #[source]
        source: bec1d_core::Error,
    },

    /// One or more verification checks failed.
    #[error("verification failed: {0}")]
    Verification(String),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

/// Attaches the module name to a core error.
pub(crate) trait Context<T> {
    fn context(self, context: &'static str) -> Result<T, CliError>;
}

impl<T> Context<T> for bec1d_core::Result<T> {
    fn context(self, context: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Compute { context, source })
    }
}
