use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;

/// Process exit codes, one per failure category.
pub mod exit {
    pub const OK: i32 = 0;
    /// Bad flags, unreadable or invalid config file, unphysical parameters.
    pub const CONFIG: i32 = 2;
    /// The dense two-excitation problem does not fit the memory budget.
    pub const MEMORY_BUDGET: i32 = 3;
    /// An eigensolver failed or the iterative solver did not converge.
    pub const SOLVER: i32 = 4;
    /// Outputs could not be written.
    pub const IO: i32 = 5;
    /// A sweep finished but some of its items failed.
    pub const PARTIAL: i32 = 6;
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),

    #[error("cannot read config {path}: {source}")]
    ConfigFile {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] polariton_core::Error),

    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{failed} of {total} sweep items failed")]
    Partial { failed: usize, total: usize },
}

impl PipelineError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn category(&self) -> &'static str {
        use polariton_core::Error as E;
        match self {
            Self::Config(_) | Self::ConfigFile { .. } => "config",
            Self::Core(E::InvalidParams(_)) | Self::Core(E::DispersionPole { .. }) => "config",
            Self::Core(E::MemoryBudget { .. }) => "memory-budget",
            Self::Core(_) => "solver",
            Self::Io { .. } => "io",
            Self::Partial { .. } => "partial",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "config" => exit::CONFIG,
            "memory-budget" => exit::MEMORY_BUDGET,
            "io" => exit::IO,
            "partial" => exit::PARTIAL,
            _ => exit::SOLVER,
        }
    }
}
