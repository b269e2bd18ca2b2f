//! Error type shared across the crate.

/// Errors produced by validation and by the numerical operations.
///
/// Variants split into two families: rejected inputs (bad dimensions,
/// non-finite entries, failed validation gates) and numerical refusals
/// (branch cuts, singular inputs, out-of-chart arguments). The CLI maps the
/// former to exit code 1 and the latter to exit code 2.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("columns are not orthonormal: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotOrthonormal { residual: f64, tol: f64 },

    #[error("matrix is not a projection: {check} residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotAProjection {
        check: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("matrix is not idempotent: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotIdempotent { residual: f64, tol: f64 },

    #[error("matrix is not unitary: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotUnitary { residual: f64, tol: f64 },

    #[error("singular input: smallest singular value {sigma_min:.3e} at or below floor {floor:.3e}")]
    SingularInput { sigma_min: f64, floor: f64 },

    #[error("logarithm branch cut: an eigenvalue lies within {tol:.3e} of -1 (distance {distance:.3e})")]
    BranchCut { distance: f64, tol: f64 },

    #[error("no unique geodesic: the symmetry product has an eigenvalue within {tol:.3e} of -1 (distance {distance:.3e})")]
    NoUniqueGeodesic { distance: f64, tol: f64 },

    #[error("not a product of two projections: Crimmins residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotAProduct { residual: f64, tol: f64 },

    #[error("out of chart: {0}")]
    OutOfChart(String),

    #[error("empty generic part")]
    EmptyGenericPart,

    #[error("rank mismatch: {0}")]
    RankMismatch(String),

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
}

impl Error {
    /// True for errors that reject the input itself rather than report a
    /// numerical condition encountered while processing a valid input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NonFinite
                | Error::DimensionMismatch(_)
                | Error::InvalidParameter(_)
                | Error::NotOrthonormal { .. }
                | Error::NotAProjection { .. }
                | Error::NotIdempotent { .. }
                | Error::NotUnitary { .. }
                | Error::RankMismatch(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
