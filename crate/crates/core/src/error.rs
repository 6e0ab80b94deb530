use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("power iteration did not converge after {iterations} iterations (relative residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("bound violated: {0}")]
    BoundViolation(String),
    #[error("non-finite value produced in layer {layer}")]
    NonFinite { layer: usize },
    #[error("training diverged at epoch {epoch} (loss {loss:e})")]
    Diverged {
        epoch: usize,
        loss: f64,
        history: Vec<f64>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Shape(msg.into()))
}
