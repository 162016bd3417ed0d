use thiserror::Error;

/// Errors raised by the kernel, resolvent, moment, simulation and
/// pathwise-derivative layers.
#[derive(Debug, Error)]
pub enum HawkesError {
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The kernel's L1 norm is not strictly below one, so the process is not
    /// stable (stability assumption: `||Phi||_1 < 1`).
    #[error("stability assumption violated: ||Phi||_1 = {norm} must be < 1")]
    StabilityViolation { norm: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("time {time} outside [0, {horizon}]")]
    Range { time: f64, horizon: f64 },

    #[error("unsupported kernel: {0}")]
    UnsupportedKernel(String),

    #[error("configuration of {n} atoms exceeds the subset-enumeration limit of {max}")]
    Size { n: usize, max: usize },

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("malformed kernel description: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HawkesError>;

pub(crate) fn argument(msg: impl Into<String>) -> HawkesError {
    HawkesError::Argument(msg.into())
}
