use std::path::PathBuf;

use thiserror::Error;

use crate::harness::wire::WireError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("input outside target domain: {0}")]
    Domain(String),

    #[error("unknown target `{0}`")]
    UnknownTarget(String),

    #[error("seed input {index} did not execute cleanly ({status})")]
    SeedFailed { index: usize, status: String },

    #[error("cannot model path {path}: {reason}")]
    Unmodeled { path: String, reason: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error("{failed} of {total} instrumented re-executions failed")]
    Reexecution { failed: usize, total: usize },

    #[error(transparent)]
    Wire(#[from] WireError),

    #[error("external target: {0}")]
    External(String),

    #[error("bundle {path}: {reason}")]
    Bundle { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
