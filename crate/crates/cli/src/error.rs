use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numerical(#[from] qactive::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    /// Rejected model parameters are a usage problem, not a numerical one.
    pub fn from_params(e: qactive::Error) -> Self {
        match e {
            qactive::Error::InvalidParameter(msg) => Self::Usage(msg),
            other => Self::Numerical(other),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Numerical(_) | Self::Io { .. } => 1,
        }
    }
}
