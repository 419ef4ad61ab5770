use thiserror::Error;

/// Failure modes surfaced by the toolkit.
///
/// Domain failures (an unattainable discrepancy level, a singular regularized
/// system) get their own variants so callers can branch on them; programming
/// errors such as dimension mismatches in arithmetic panic instead.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimensions for {op}: {details}")]
    InvalidDimensions { op: &'static str, details: String },

    #[error("non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("SVD iteration failed to converge")]
    SvdNonConvergence,

    #[error("regularized normal-equations matrix is not positive definite")]
    SingularRegularizedSystem,

    #[error("invalid parameter {name}: {details}")]
    InvalidParam { name: &'static str, details: String },

    #[error("noise basis is not orthogonal: residual {residual:.3e} exceeds {tol:.3e}")]
    NonOrthogonalBasis { residual: f64, tol: f64 },

    #[error(
        "discrepancy target {target:.6e} is at or above the data norm {data_norm:.6e}; \
         the zero solution already satisfies it"
    )]
    NoiseDominatesData { target: f64, data_norm: f64 },

    #[error(
        "discrepancy target {target:.6e} is at or below the residual floor {floor:.6e}; \
         no parameter value attains it"
    )]
    DiscrepancyUnattainable { target: f64, floor: f64 },

    #[error("{what} did not converge within {iterations} iterations")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error(
        "spectral component {index} has a positive singular value, a zero regularized \
         weight, and a nonzero data component"
    )]
    UnregularizedNullComponent { index: usize },

    #[error("{excluded} of {total} trials were excluded, above the 1% cap")]
    ExcessiveExclusions { excluded: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
