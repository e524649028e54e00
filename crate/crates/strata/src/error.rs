use std::path::PathBuf;

/// Failure classes of the command-line front end, each with its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Classifies a core error raised while a run is in progress.
    pub fn from_run(e: strata_core::Error) -> Self {
        use strata_core::Error as E;
        match e {
            E::BlowUp { .. } | E::NonFinite(_) | E::Singular(_) => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }

    /// Classifies a core error raised while building a setup.
    pub fn from_setup(context: &str, e: strata_core::Error) -> Self {
        CliError::Validation(format!("{context}: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
