//! Experiment runner for the singular Fokker-Planck toolkit: run manifests,
//! verification suites and artifact export.

pub mod criteria;
pub mod export;
pub mod manifest;
pub mod pipeline;
pub mod report;

use std::path::PathBuf;

pub use manifest::{ExperimentKind, RunManifest};
pub use report::{Check, Report};

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_VAR: &str = "SFP_OUTPUT_ROOT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The manifest or a command-line argument is invalid; nothing was computed.
    #[error("validation error: {0}")]
    Validation(String),
    #[error(transparent)]
    Compute(#[from] sfp_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Short classification written into reports.
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Compute(e) => match e {
                sfp_core::Error::Domain(_) => "domain",
                sfp_core::Error::Usage(_) => "usage",
                sfp_core::Error::Range(_) => "range",
                sfp_core::Error::Resolution(_) => "resolution",
                sfp_core::Error::IterationFailure { .. } => "iteration-failure",
                sfp_core::Error::Format(_) => "format",
                sfp_core::Error::Io(_) => "io",
            },
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> ExitStatus {
        match self {
            CliError::Validation(_) => ExitStatus::Invalid,
            _ => ExitStatus::Internal,
        }
    }
}

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    CriterionFailed = 1,
    Invalid = 2,
    Internal = 3,
}

/// Output root from the environment, or `./sfp-runs`.
pub fn default_output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("sfp-runs"))
}
