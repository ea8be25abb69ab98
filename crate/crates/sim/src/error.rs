use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{path}: malformed CSV: {message}")]
    Csv { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] protective_core::Error),
}

impl SimError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn config(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Self::Config { path: path.into(), message: message.to_string() }
    }

    /// Process exit code: 2 for bad input, 3 for propagation that did not
    /// converge, 4 for I/O, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use protective_core::Error as E;
        match self {
            Self::Io { .. } => 4,
            Self::Config { .. } | Self::Csv { .. } => 2,
            Self::Core(E::Convergence { .. }) => 3,
            Self::Core(E::Wraparound { .. }) => 1,
            Self::Core(_) => 2,
        }
    }
}

pub type SimResult<T> = Result<T, SimError>;
