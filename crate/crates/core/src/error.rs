use thiserror::Error;

/// Errors raised by bound evaluation and the matrix kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CfError {
    #[error("domain error: {0}")]
    Domain(String),

    /// The bound exists mathematically but is not representable in binary64;
    /// at these inputs it is vacuous.
    #[error("overflow: {0}")]
    Overflow(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("matrix is not positive definite (min eigenvalue {min_eig:e}, floor {floor:e})")]
    NotPositiveDefinite { min_eig: f64, floor: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("operands are not comparable in the Loewner order")]
    OrderingIndeterminate,

    #[error(
        "Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})"
    )]
    Convergence { sweeps: usize, off_norm: f64 },
}

pub type Result<T> = std::result::Result<T, CfError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(CfError::Domain(msg.into()))
}
