use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameters or grids that are individually valid but cannot be combined.
    #[error("configuration error: {0}")]
    Config(String),

    /// Overflow or NaN while marching a recurrence.
    #[error("numerical failure at step {step}: {reason}")]
    Numerical { step: usize, reason: String },

    /// Adaptive quadrature did not meet its tolerance.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// A coefficient denominator (|F| or |u^2 - v^2|) fell below the guard.
    #[error("singular coefficient at t = {time}: |denominator| = {magnitude:e}")]
    SingularCoefficient { time: f64, magnitude: f64 },

    /// The Fock cutoff is too small for the requested coherent amplitude.
    #[error("cutoff {cutoff} too small: truncated tail norm {deficit:e} (try a larger cutoff)")]
    Cutoff { cutoff: usize, deficit: f64 },

    /// A state cannot be normalized.
    #[error("normalization error: {0}")]
    Normalization(String),

    /// The Fock-space integrator drifted out of the set of density operators.
    #[error("integration error at t = {time}: {reason}")]
    Integration { time: f64, reason: String },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

pub type Result<T> = std::result::Result<T, Error>;
