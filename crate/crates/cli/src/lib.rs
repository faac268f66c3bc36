//! Experiment harness and file formats for the offline policy evaluation
//! laboratory.
//!
//! The [`experiments`] module drives Monte Carlo sweeps over the hard
//! instances (error amplification across the horizon, the two-world
//! distinguishing test, and the low-shift upper-bound regime); [`document`]
//! defines the JSON document format for instances and reports; [`output`]
//! writes the CSV tables and plot-ready data. Everything is deterministic
//! given the configured base seed: rerunning a command reproduces its
//! output files byte for byte.

pub mod config;
pub mod document;
pub mod experiments;
pub mod output;

use std::path::PathBuf;

/// Errors surfaced by the harness and CLI, split by exit code: usage
/// problems exit with 2, failed checks and runtime failures with 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    CheckFailed(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },

    #[error(transparent)]
    Core(#[from] opelab_core::Error),
}

impl CliError {
    /// Process exit code mandated for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn check(msg: impl Into<String>) -> Self {
        CliError::CheckFailed(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
