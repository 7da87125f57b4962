use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or input file contents.
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Sim(#[from] banksim_core::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// 0 success, 1 configuration, 2 runtime invariant, 3 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Sim(banksim_core::Error::Config(_)) => 1,
            CliError::Sim(_) => 2,
            CliError::Io { .. } => 3,
        }
    }

    pub(crate) fn io(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn csv(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
        move |e| {
            if e.is_io_error() {
                match e.into_kind() {
                    csv::ErrorKind::Io(source) => CliError::Io {
                        path: path.to_path_buf(),
                        source,
                    },
                    _ => unreachable!(),
                }
            } else {
                CliError::Config(format!("{}: {e}", path.display()))
            }
        }
    }
}
