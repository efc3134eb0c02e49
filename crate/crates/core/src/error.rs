//! Error type shared by all library modules.

use thiserror::Error;

/// Errors raised by cell construction, mode reduction, assembly, eigensolves,
/// and analytic root-finding.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: String,
    },

    /// The requested mesh cannot resolve the constant collar of the neck.
    #[error("mesh too coarse: {0}")]
    MeshTooCoarse(String),

    /// Array lengths or matrix dimensions are inconsistent.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The mass matrix is not positive definite (Cholesky factorization
    /// failed); signals an invalid mass coefficient or a broken grid.
    #[error("mass matrix is not positive definite")]
    MassNotPositiveDefinite,

    /// The Hermitian eigensolver did not converge.
    #[error("eigensolver failed to converge on a {size}×{size} matrix")]
    EigenSolverFailed { size: usize },

    /// A dispersion-relation root could not be bracketed.
    #[error("root bracketing failed: {detail}")]
    RootBracketing { detail: String },

    /// Not enough data for the requested comparison (short reference
    /// spectrum, too few refinement levels, empty band list, ...).
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A discretization-error sequence failed to decrease under refinement.
    #[error("non-monotone discretization errors: {0}")]
    NonMonotoneConvergence(String),

    /// A solve failed inside a sweep; carries the (θ, mode) context.
    #[error("solve failed at theta={theta}, angular degree {degree}: {source}")]
    SweepSolve {
        theta: f64,
        degree: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
