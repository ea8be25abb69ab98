use alloc::string::String;

/// Errors raised by the measurement simulator core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("sizing error: {0}")]
    Sizing(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("mode error: {0}")]
    Mode(String),
    #[error("setup error: {0}")]
    Setup(String),
    #[error("propagation did not converge: Richardson estimate {estimate:e} at {n_steps} steps")]
    Convergence { estimate: f64, n_steps: usize },
    #[error("pointer mass {edge_mass:.3e} within {margin:.3e} of the box edge; readout would wrap")]
    Wraparound { edge_mass: f64, margin: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
