use thiserror::Error;

/// Errors raised by the state, entanglement, family and search layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimensions must be positive (got {dim_a}x{dim_b})")]
    ZeroDimension { dim_a: usize, dim_b: usize },

    #[error("amplitude array has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("norm {norm:e} is too close to zero to normalize")]
    NearZeroNorm { norm: f64 },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("non-finite amplitude at index {index}")]
    NonFinite { index: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("density matrix has trace {trace}, expected 1")]
    TraceDeviation { trace: f64 },

    #[error("eigenvalue {value:e} is below the clamp window")]
    NegativeEigenvalue { value: f64 },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("coefficients are not normalized (sum of squared moduli {sum})")]
    CoefficientNormalization { sum: f64 },

    #[error("{name} = {value} is outside [0, 1]")]
    OutOfDomain { name: &'static str, value: f64 },

    #[error("states are not orthogonal (|<phi|psi>| = {overlap:e})")]
    NotOrthogonal { overlap: f64 },

    #[error("states are not bi-orthogonal (reduced overlaps {overlap_a:e}, {overlap_b:e})")]
    NotBiorthogonal { overlap_a: f64, overlap_b: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("report field `{0}` does not match its recomputed value")]
    ReportMismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
