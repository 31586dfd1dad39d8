use thiserror::Error;

use crate::pseudo_unitary::RelationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("expected {expected} entries for a {rows}x{cols} matrix, got {got}")]
    InvalidShape {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("matrix is numerically singular")]
    Singular,

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("operator norm {norm} is not below 1 (open ball)")]
    NotStrictContraction { norm: f64 },

    #[error("operator norm {norm} exceeds 1 (closed ball)")]
    NotContraction { norm: f64 },

    #[error("H and K must have different dimensions (got m = n = {0})")]
    SquareDims(usize),

    #[error("I + B*A is numerically singular")]
    SingularFactor,

    #[error("denominator T21 A + T22 is numerically singular")]
    SingularDenominator,

    #[error("factorization roundtrip residual {residual:.3e} too large")]
    ReconstructionFailure { residual: f64 },

    #[error("matrix is not a member of the pseudo-unitary group")]
    NotAMember(RelationReport),

    #[error("zero vector has no causal type")]
    ZeroVector,

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("block pattern residual {residual:.3e} too large")]
    StructureResidual { residual: f64 },

    #[error("a^2 = 1 + delta^2 violated (residual {residual:.3e})")]
    InconsistentPair { residual: f64 },

    #[error("analytic spectrum differs from numerical spectrum by {distance:.3e}")]
    SpectrumMismatch { distance: f64 },

    #[error("columns do not form a basis")]
    NotABasis,

    #[error("eigenbasis of a block coordinate matrix failed unitarity checks (residual {residual:.3e})")]
    DegenerateBlockGauge { residual: f64 },

    #[error("eigenvector residual {residual:.3e} too large")]
    IllConditionedEigenbasis { residual: f64 },

    #[error("isometry is not non-unitary normal")]
    NotNonUnitaryNormal,
}
