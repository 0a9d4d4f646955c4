use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment spec: {0}")]
    Validation(String),
    #[error(transparent)]
    Engine(#[from] stopped_grains::Error),
    #[error("oracle refused: {0}")]
    OracleRefused(String),
    #[error("comparison failed: {0}")]
    Compare(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization error: {0}")]
    Serialize(String),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    /// 2 for anything detectable from the inputs, 3 for failures during a run.
    pub fn exit_code(&self) -> i32 {
        use stopped_grains::Error as E;
        match self {
            HarnessError::Validation(_) | HarnessError::OracleRefused(_) => 2,
            HarnessError::Engine(E::Config(_) | E::Precondition(_) | E::CriterionUnsatisfiable { .. }) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
