use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension {0}: at least 2 is required")]
    InvalidDimension(usize),

    #[error("outcome index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("basis is not orthonormal (max Gram deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("eigenvalues are degenerate")]
    DegenerateEigenvalues,

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error(
        "dense construction needs dimension {required}, above the cap of {cap}; use the analytic path"
    )]
    DenseCapExceeded { required: u128, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid g-measure: {0}")]
    InvalidMeasure(String),

    #[error("sequences are not equivalent")]
    Inequivalent,

    #[error("contexts do not share the selected eigenstate (overlap magnitude {overlap})")]
    NoSharedEigenstate { overlap: f64 },

    #[error("noncontextuality audit needs dimension >= 3, got {0}: in two dimensions a shared eigenvector fixes the whole basis up to phases")]
    UnsupportedDimension(usize),

    #[error("underdetermined fit: design rank {rank}, {required} required")]
    Underdetermined { rank: usize, required: usize },

    #[error("not a density operator: {0}")]
    NotDensityOperator(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
