use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("Gauss-Lobatto root finder did not converge for M = {nodes}")]
    QuadratureNoConvergence { nodes: usize },
    #[error("singular linear system at step {step}")]
    SingularSystem { step: usize },
    #[error("Cholesky factorization failed after jitter {jitter:e}")]
    Factorization { jitter: f64 },
    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },
    #[error("non-finite loss for sample {sample}")]
    NonFiniteLoss { sample: usize },
    #[error("optimizer diverged at iteration {iteration}: loss {loss:e} vs running minimum {best:e}")]
    Divergence { iteration: usize, loss: f64, best: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
