use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("generation stalled: {0}")]
    GenerationStall(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("degenerate ensemble for correlation pair {0}")]
    DegenerateEnsemble(String),
    #[error("zero-variance column at principal component {0}")]
    ZeroVariance(usize),
    #[error("ill-conditioned kernel matrix: {0}")]
    Conditioning(String),
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    #[error("invalid state: {0}")]
    State(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! arg_err {
    ($($t:tt)*) => { $crate::error::Error::Argument(alloc::format!($($t)*)) };
}
pub(crate) use arg_err;
