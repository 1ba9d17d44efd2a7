use alloc::string::String;

/// Errors raised by targets, autoencoders, and sampling kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("degenerate volume: Gramian volume {0:e} is below 1e-300 (rank-deficient Jacobian)")]
    DegenerateVolume(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("training diverged at epoch {epoch}: loss is {loss} (learning rate too high?)")]
    TrainingDiverged { epoch: usize, loss: f64 },
    #[error("degenerate series: {0}")]
    DegenerateSeries(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
