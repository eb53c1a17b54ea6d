//! File formats, parallel Monte Carlo runners and the `oneway` command-line
//! tool built on [`oneway_core`].

use std::path::PathBuf;

pub mod cli;
pub mod io;
pub mod report;
pub mod runner;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] oneway_core::Error),
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
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl Error {
    /// Process exit code: 2 for infeasible searches and exceeded caps, 1 for
    /// everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(e) if e.is_infeasible() => 2,
            _ => 1,
        }
    }

    /// Short machine-readable classification.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Core(oneway_core::Error::CapExceeded { .. }) => "cap_exceeded",
            Error::Core(e) if e.is_infeasible() => "infeasible",
            Error::Core(_) => "invalid_input",
            Error::Io { .. } | Error::Csv(_) | Error::ThreadPool(_) => "io",
            Error::Json { .. } | Error::Format { .. } => "invalid_file",
            Error::Usage(_) => "usage",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
