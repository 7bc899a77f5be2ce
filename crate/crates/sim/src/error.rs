use std::io;
use std::path::PathBuf;

/// A configuration problem, naming the offending field.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("invalid `{field}`: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self { field: field.into(), reason: reason.into() }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("i/o error on {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("trace error in {}: {reason}", path.display())]
    Trace { path: PathBuf, reason: String },
    #[error("sweep error: {0}")]
    Sweep(String),
    #[error("attack error: {0}")]
    Attack(String),
    #[error("oracle mismatch at {0} node(s)")]
    OracleMismatch(usize),
    #[error("scenario not comparable with the oracle: {0}")]
    OracleInvalid(String),
}

impl SimError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        SimError::Io { path: path.into(), source }
    }

    pub fn trace(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        SimError::Trace { path: path.into(), reason: reason.into() }
    }

    /// Process exit status; 2 is left to argument parsing.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) => 3,
            SimError::Io { .. } => 4,
            SimError::Trace { .. } => 5,
            SimError::Sweep(_) => 6,
            SimError::Attack(_) => 7,
            SimError::OracleMismatch(_) => 8,
            SimError::OracleInvalid(_) => 9,
        }
    }
}
