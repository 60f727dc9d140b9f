use std::path::{Path, PathBuf};

use machtherm_core::Error as CoreError;

/// Everything that can stop a command, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),
    #[error("input {path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("{module}: {source}")]
    Core {
        module: &'static str,
        #[source]
        source: CoreError,
    },
    #[error("calibrate: no convergence after {evaluations} evaluations (misfit {misfit:e} °C²)")]
    NotConverged { evaluations: usize, misfit: f64 },
}

impl Error {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Error::Input {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }

    pub fn input(path: &Path, message: impl Into<String>) -> Self {
        Error::Input {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    /// Wraps a core error, naming the module it came from.
    pub fn core(module: &'static str) -> impl FnOnce(CoreError) -> Self {
        move |source| Error::Core { module, source }
    }

    /// 1: configuration or input, 2: numerical failure, 3: no convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Input { .. } => 1,
            Error::Core { source, .. } => match source {
                CoreError::NotConverged { .. } => 3,
                CoreError::DegenerateElement { .. }
                | CoreError::SingularSystem(_)
                | CoreError::NotPositiveDefinite { .. }
                | CoreError::ThresholdNotCrossed { .. } => 2,
                _ => 1,
            },
            Error::NotConverged { .. } => 3,
        }
    }
}
