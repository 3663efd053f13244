//! Numerical classification of probability-preserving maps on ℂⁿ.
//!
//! A map `T` with `|⟨Tw|Tz⟩| = |⟨w|z⟩|` is, after removing a pointwise phase,
//! either a unitary or an antiunitary operator. [`classify`] decides which one
//! from black-box evaluations and returns the matrix.
//!
//! ```
//! use wigner::{classify, Branch, ClassifyConfig, Transformation};
//!
//! let t = Transformation::conjugation(3);
//! let result = classify(&t, &ClassifyConfig::default()).unwrap();
//! assert_eq!(result.branch, Branch::Antilinear);
//! ```

// Checks are written `!(residual < tol)` so that a NaN residual fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifier;
pub mod cli;
pub mod dsl;
pub mod error;
pub mod gauge;
pub mod generators;
pub mod mazurulam;
pub mod phase;
pub mod state;
pub mod transform;
pub mod wirtinger;

pub use classifier::{check_preservation, classify, Branch, ClassificationResult, ClassifyConfig, PreservationReport};
pub use error::{Error, Result};
pub use gauge::{extract_theta, gauge_fix, verify_theta_antisymmetry, GaugeConfig, GaugeFixedTransformation, PhaseBranch};
pub use mazurulam::{check_isometry, reconstruct_orthogonal, MazurUlamConfig, RealTransformation};
pub use state::{CMatrix, StateVector};
pub use transform::Transformation;
pub use wirtinger::{richardson_refine, wirtinger_jacobian, WirtingerJacobian};
