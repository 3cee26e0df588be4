use std::path::PathBuf;

/// Errors raised anywhere in the simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: String, got: String },

    #[error("power iteration did not converge: residual {residual:e} after {iterations} iterations")]
    Convergence { residual: f64, iterations: usize },

    #[error("reference solver did not reach tolerance {tol:e} within {iterations} iterations (gradient norm {grad_norm:e})")]
    SolverStalled {
        tol: f64,
        iterations: usize,
        grad_norm: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("malformed payload: {0}")]
    Decode(String),

    #[error("divergence at iteration {k}: {dump}")]
    Divergence { k: u64, dump: String },

    #[error("config error in {path}: {message}")]
    Config { path: String, message: String },

    #[error("bad file format in {path:?}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
