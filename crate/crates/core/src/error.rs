//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |A - A†| entry is {asymmetry:.3e} (relative tolerance {tol:.1e})")]
    NotHermitian { asymmetry: f64, tol: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("dimension too small: need d >= {min}, got {got}")]
    DimTooSmall { min: usize, got: usize },

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("Gram matrix is singular (numerical rank {rank} < order {order})")]
    SingularGram { rank: usize, order: usize },

    #[error("observable is not a qubit observable (d = 2 required, got d = {0})")]
    NonQubit(usize),

    #[error("histogram edges must be strictly increasing")]
    NonMonotoneEdges,

    #[error("wrong distribution variant: {0}")]
    WrongVariant(&'static str),

    #[error("unsupported dimension d = {dim}: {details}")]
    UnsupportedDimension { dim: usize, details: String },

    #[error("invalid observable: {0}")]
    InvalidObservable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
