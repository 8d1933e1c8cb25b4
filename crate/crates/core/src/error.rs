use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("non-positive density {value:.3e} in cell {cell}")]
    NegativeDensity { cell: usize, value: f64 },

    #[error("step failed after {retries} retries at t = {time}: {reason}")]
    StepFailure {
        retries: usize,
        time: f64,
        reason: String,
    },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error("malformed run log: {0}")]
    RunLog(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
