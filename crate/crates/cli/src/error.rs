use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] kgg::Error),

    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("fit did not converge (partial report written)")]
    NotConverged,
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 usage/data, 3 numeric or existence, 4 non-convergence.
    pub fn exit_code(&self) -> ExitCode {
        use kgg::Error as E;
        let code = match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::NotConverged => 4,
            CliError::Lib(e) => match e {
                E::Parse(_) | E::Io(_) | E::InsufficientData(_) => 2,
                E::NonConvergence { .. } => 4,
                E::Domain { .. } | E::InvalidParams(_) | E::Existence { .. } | E::NoPowerLawTail(_) => 3,
            },
        };
        ExitCode::from(code)
    }
}
