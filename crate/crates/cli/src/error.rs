use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(hdch::Error),
    #[error("property failures: {}", .0.join(", "))]
    Property(Vec<String>),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Property(_) => 1,
            CliError::Usage(_) | CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Solver(_) => 3,
        }
    }

    /// Errors raised while setting a run up: iteration failures are solver
    /// failures, everything else is a bad configuration.
    pub fn setup(e: hdch::Error) -> Self {
        match e {
            hdch::Error::NoConvergence { .. } | hdch::Error::NewtonDiverged { .. } => CliError::Solver(e),
            other => CliError::Config(other.to_string()),
        }
    }

    pub fn io(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Self + '_ {
        move |source| CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
