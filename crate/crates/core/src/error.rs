use thiserror::Error;

use crate::exploration::StoppedExploration;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("branching criterion unsatisfiable at minimum step (criterion {value:.4} > safety {safety})")]
    CriterionUnsatisfiable { value: f64, safety: f64 },
    /// The run is aborted; `partial` holds lifetimes settled before the
    /// offending step.
    #[error("cluster cap exceeded: {size} grains in one cluster at step {step} (cap {cap})")]
    ClusterCap {
        size: usize,
        cap: usize,
        step: usize,
        partial: Box<StoppedExploration>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
