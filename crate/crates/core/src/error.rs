use thiserror::Error;

/// Error classification shared by every module of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Inputs are individually valid but do not fit together (grid mismatch, wrong componentry, ...).
    #[error("usage error: {0}")]
    Usage(String),
    /// The request exceeds the range where the numerical method is accurate.
    #[error("range error: {0}")]
    Range(String),
    /// A smoothing scale is below what the grid can represent.
    #[error("resolution error: {0}")]
    Resolution(String),
    /// Picard iteration did not reach its tolerance.
    #[error("no convergence after {iterations} iterations (last distance {last:.3e})")]
    IterationFailure { iterations: usize, last: f64, history: Vec<f64> },
    /// Malformed input file or manifest.
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
