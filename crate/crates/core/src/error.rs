use thiserror::Error;

use crate::classifier::PreservationReport;
use crate::dsl::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Numeric verdict errors (`NotASymmetry`, `MixedBranch`, ...) carry the
/// measured quantities that triggered them so callers can emit diagnostics.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("evaluation produced a non-finite value")]
    NonFiniteEvaluation,

    #[error("division by a value of modulus {modulus:e} (below 1e-300)")]
    DivisionNearZero { modulus: f64 },

    #[error("degenerate pair: |<w|z>| = {overlap:e} is below threshold {threshold:e}")]
    DegeneratePair { overlap: f64, threshold: f64 },

    #[error("not probability preserving: |Z| = {modulus} deviates from 1")]
    NotProbabilityPreserving { modulus: f64 },

    #[error("transformation does not fix the origin: |T(0)| = {norm:e}")]
    OriginNotFixed { norm: f64 },

    #[error("not a symmetry: max preservation deviation {:e} exceeds tolerance {:e}", .0.max_deviation, .0.tolerance)]
    NotASymmetry(Box<PreservationReport>),

    #[error("mixed branch: |d_z|_max = {d_z_max:e}, |d_zbar|_max = {d_zbar_max:e}")]
    MixedBranch { d_z_max: f64, d_zbar_max: f64 },

    #[error("reconstructed operator is not unitary: residual {residual:e}")]
    NotUnitary { residual: f64 },

    #[error("reconstruction mismatch ({stage}): residual {residual:e}")]
    ReconstructionMismatch { stage: &'static str, residual: f64 },

    #[error("not an isometry: max deviation {max_deviation:e}")]
    NotIsometry { max_deviation: f64 },

    #[error("reconstructed matrix is not orthogonal: residual {residual:e}")]
    NotOrthogonal { residual: f64 },

    #[error("reference matrix has no entry with modulus above 1e-8")]
    ZeroReference,

    #[error("input matrix is not unitary: residual {residual:e}")]
    NotUnitaryInput { residual: f64 },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("unknown matrix constant `{0}`")]
    UnknownMatrix(String),
}

impl Error {
    /// Stable snake_case identifier used in machine-readable reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonFiniteEvaluation => "non_finite_evaluation",
            Error::DivisionNearZero { .. } => "division_near_zero",
            Error::DegeneratePair { .. } => "degenerate_pair",
            Error::NotProbabilityPreserving { .. } => "not_probability_preserving",
            Error::OriginNotFixed { .. } => "origin_not_fixed",
            Error::NotASymmetry(_) => "not_a_symmetry",
            Error::MixedBranch { .. } => "mixed_branch",
            Error::NotUnitary { .. } => "not_unitary",
            Error::ReconstructionMismatch { .. } => "reconstruction_mismatch",
            Error::NotIsometry { .. } => "not_isometry",
            Error::NotOrthogonal { .. } => "not_orthogonal",
            Error::ZeroReference => "zero_reference",
            Error::NotUnitaryInput { .. } => "not_unitary_input",
            Error::Parse(e) => e.code(),
            Error::UnknownMatrix(_) => "unknown_matrix",
        }
    }

    /// Process exit code: 2 when the input was evaluated and found not to be
    /// a symmetry (or not an isometry), 1 for every input or usage problem.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotASymmetry(_)
            | Error::NotProbabilityPreserving { .. }
            | Error::OriginNotFixed { .. }
            | Error::MixedBranch { .. }
            | Error::NotUnitary { .. }
            | Error::ReconstructionMismatch { .. }
            | Error::NotIsometry { .. }
            | Error::NotOrthogonal { .. } => 2,
            Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. }
            | Error::NonFiniteEvaluation
            | Error::DivisionNearZero { .. }
            | Error::DegeneratePair { .. }
            | Error::ZeroReference
            | Error::NotUnitaryInput { .. }
            | Error::Parse(_)
            | Error::UnknownMatrix(_) => 1,
        }
    }
}
