use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("cross approximation stopped at relative error {achieved:.3e} (target {target:.3e}, ranks {ranks:?})")]
    ToleranceNotReached {
        target: f64,
        achieved: f64,
        ranks: Vec<usize>,
    },

    #[error("kernel is singular at a sampled point: {0}")]
    Singularity(String),

    #[error("iteration diverged: {0}")]
    Divergence(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("dense footprint of {required} bytes exceeds the memory cap of {cap} bytes")]
    MemoryCap { required: u64, cap: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of the numerical kind (as opposed to usage or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateInput(_)
                | Error::ToleranceNotReached { .. }
                | Error::Singularity(_)
                | Error::Divergence(_)
                | Error::Linalg(_)
        )
    }
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

impl From<ndarray::ShapeError> for Error {
    fn from(e: ndarray::ShapeError) -> Self {
        Error::Linalg(format!("shape error: {e}"))
    }
}
