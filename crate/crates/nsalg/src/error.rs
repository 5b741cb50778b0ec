//! Error type shared by all toolkit operations.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NsError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator contains non-finite entries")]
    NonFinite,

    #[error("operator is not hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("operator is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("algebra closure failed to stabilize within {max_rounds} rounds")]
    ClosureOverflow { max_rounds: usize },

    #[error("group closure exceeded max order {max_order}; the generated group may be infinite")]
    GroupOrderOverflow { max_order: usize },

    #[error("block decomposition failed after {attempts} seed retries: {diagnostics}")]
    DecompositionFailed { attempts: usize, diagnostics: String },

    #[error("invalid sector label {0}")]
    UnknownSector(String),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("invalid stabilizer generators: {0}")]
    InvalidStabilizer(String),

    #[error("invalid Pauli string: {0}")]
    InvalidPauli(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("Kraus map violates completeness: residual {residual:.3e}")]
    KrausIncomplete { residual: f64 },

    #[error("density matrix invalid: {0}")]
    InvalidDensity(String),

    #[error("evolution lost positivity (min eigenvalue {min_eig:.3e}); refine the step count")]
    PositivityLost { min_eig: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, NsError>;
