//! Library half of the `disentangle` command-line tool.
//!
//! The binary is a thin clap wrapper; everything it does is reachable from
//! here so integration tests can drive it in-process as well as through the
//! executable.

pub mod config;
pub mod qfunc;
pub mod run;
pub mod verify;

use std::path::PathBuf;

use thiserror::Error;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] disentangle::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Every error is a usage or config problem; verification failures are
    /// reported through [`verify::SuiteReport`] instead.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
