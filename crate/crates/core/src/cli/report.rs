use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use super::CliError;
use crate::classifier::{ClassificationResult, ClassifyConfig, PreservationReport};
use crate::error::Error;
use crate::state::CMatrix;

/// Version of the report layout described in `docs/report.schema.json`.
pub const SCHEMA_VERSION: &str = "1.0";

pub(crate) fn complex(c: Complex64) -> Value {
    json!([c.re, c.im])
}

pub(crate) fn complex_vector(v: &[Complex64]) -> Value {
    Value::Array(v.iter().map(|&c| complex(c)).collect())
}

/// Row-major list of rows of [re, im] pairs.
pub(crate) fn complex_matrix(m: &CMatrix) -> Value {
    Value::Array((0..m.nrows()).map(|r| Value::Array(m.row(r).iter().map(|&c| complex(c)).collect())).collect())
}

pub(crate) fn real_matrix(m: &DMatrix<f64>) -> Value {
    Value::Array((0..m.nrows()).map(|r| json!(m.row(r).iter().copied().collect::<Vec<f64>>())).collect())
}

pub(crate) fn preservation(p: &PreservationReport) -> Value {
    serde_json::to_value(p).expect("preservation report serializes")
}

pub(crate) fn classification_body(r: &ClassificationResult, config: &ClassifyConfig) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("verdict".into(), json!(r.branch.as_str()));
    m.insert("branch".into(), json!(r.branch.as_str()));
    m.insert("operator".into(), complex_matrix(&r.operator));
    m.insert("unitarity_residual".into(), json!(r.unitarity_residual));
    m.insert("reconstruction_residual".into(), json!(r.reconstruction_residual));
    m.insert("constancy_residual".into(), json!(r.constancy_residual));
    m.insert("d_z_max".into(), json!(r.d_z_max));
    m.insert("d_zbar_max".into(), json!(r.d_zbar_max));
    m.insert("gauge_reference_theta".into(), json!(r.gauge_reference_theta));
    m.insert(
        "smoothness".into(),
        json!({ "differences": r.smoothness.differences, "ratio": r.smoothness.ratio }),
    );
    m.insert("caveats".into(), serde_json::to_value(&r.caveats).expect("caveats serialize"));
    m.insert("preservation".into(), preservation(&r.preservation));
    m.insert(
        "tolerances".into(),
        json!({
            "unitarity_residual": config.tol_unitary,
            "reconstruction_residual": config.tol_unitary,
            "constancy_residual": config.tol_branch,
        }),
    );
    m
}

/// Measured quantities attached to a library error.
fn error_details(e: &Error) -> Map<String, Value> {
    let mut m = Map::new();
    match e {
        Error::DimensionMismatch { expected, found } => {
            m.insert("expected".into(), json!(expected));
            m.insert("found".into(), json!(found));
        }
        Error::DivisionNearZero { modulus } => {
            m.insert("modulus".into(), json!(modulus));
        }
        Error::DegeneratePair { overlap, threshold } => {
            m.insert("overlap".into(), json!(overlap));
            m.insert("threshold".into(), json!(threshold));
        }
        Error::NotProbabilityPreserving { modulus } => {
            m.insert("modulus".into(), json!(modulus));
        }
        Error::OriginNotFixed { norm } => {
            m.insert("norm".into(), json!(norm));
        }
        Error::MixedBranch { d_z_max, d_zbar_max } => {
            m.insert("d_z_max".into(), json!(d_z_max));
            m.insert("d_zbar_max".into(), json!(d_zbar_max));
        }
        Error::NotUnitary { residual } => {
            m.insert("unitarity_residual".into(), json!(residual));
        }
        Error::ReconstructionMismatch { stage, residual } => {
            m.insert("stage".into(), json!(stage));
            m.insert("residual".into(), json!(residual));
        }
        Error::NotIsometry { max_deviation } => {
            m.insert("max_deviation".into(), json!(max_deviation));
        }
        Error::NotOrthogonal { residual } => {
            m.insert("orthogonality_residual".into(), json!(residual));
        }
        Error::NotUnitaryInput { residual } => {
            m.insert("residual".into(), json!(residual));
        }
        Error::UnknownMatrix(name) => {
            m.insert("matrix".into(), json!(name));
        }
        Error::NotASymmetry(_)
        | Error::Parse(_)
        | Error::InvalidArgument(_)
        | Error::NonFiniteEvaluation
        | Error::ZeroReference => {}
    }
    m
}

pub(crate) fn error_body(e: &CliError, extra: Map<String, Value>) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("error".into(), json!(e.code()));
    m.insert("message".into(), json!(e.to_string()));
    m.insert("exit_code".into(), json!(e.exit_code()));
    if let CliError::Core(inner) = e {
        if let Error::Parse(p) = inner {
            m.insert("line".into(), json!(p.line));
            m.insert("column".into(), json!(p.column));
        }
        let details = error_details(inner);
        if !details.is_empty() {
            m.insert("details".into(), Value::Object(details));
        }
    }
    m.extend(extra);
    m
}
