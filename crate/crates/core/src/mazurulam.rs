//! The real Euclidean case: a smooth map preserving the scalar product is a
//! linear orthogonal transformation, and its Jacobian is the same orthogonal
//! matrix at every point.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wirtinger::{real_jacobian, DEFAULT_STEP};

pub type RealVector = DVector<f64>;

type RealEvaluator = dyn Fn(&RealVector) -> Result<RealVector> + Send + Sync;

#[derive(Clone)]
pub struct RealTransformation {
    evaluator: Arc<RealEvaluator>,
    dim: usize,
}

impl RealTransformation {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&RealVector) -> Result<RealVector> + Send + Sync + 'static,
    {
        assert!(dim >= 1, "dimension must be at least 1");
        RealTransformation { evaluator: Arc::new(f), dim }
    }

    pub fn from_fn<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&RealVector) -> RealVector + Send + Sync + 'static,
    {
        Self::new(dim, move |x| Ok(f(x)))
    }

    pub fn linear(m: DMatrix<f64>) -> Self {
        assert!(m.is_square(), "matrix must be square");
        Self::from_fn(m.nrows(), move |x| &m * x)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, x: &RealVector) -> Result<RealVector> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        let y = (self.evaluator)(x)?;
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: y.len() });
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteEvaluation);
        }
        Ok(y)
    }
}

impl fmt::Debug for RealTransformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealTransformation").field("dim", &self.dim).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    pub pairs_tested: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> RealVector {
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

/// max |T(u)·T(v) − u·v| over the origin, basis vectors, a parallel pair and
/// `num_pairs` Gaussian pairs.
pub fn check_isometry(t: &RealTransformation, num_pairs: usize, seed: u64, tol: f64) -> Result<IsometryReport> {
    if num_pairs == 0 {
        return Err(Error::InvalidArgument("num_pairs must be at least 1".into()));
    }
    let n = t.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian(n, &mut rng);
    let mut pairs = vec![(RealVector::zeros(n), RealVector::zeros(n)), (RealVector::zeros(n), g.clone()), (g.clone(), g)];
    for k in 0..n {
        let e = RealVector::from_fn(n, |i, _| if i == k { 1.0 } else { 0.0 });
        pairs.push((e.clone(), e));
    }
    for _ in 0..num_pairs {
        pairs.push((gaussian(n, &mut rng), gaussian(n, &mut rng)));
    }
    let mut max_deviation: f64 = 0.0;
    for (u, v) in &pairs {
        let dev = (t.apply(u)?.dot(&t.apply(v)?) - u.dot(v)).abs();
        max_deviation = max_deviation.max(dev);
    }
    Ok(IsometryReport { pairs_tested: pairs.len(), max_deviation, tolerance: tol, pass: max_deviation < tol })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MazurUlamConfig {
    pub step: f64,
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for MazurUlamConfig {
    fn default() -> Self {
        MazurUlamConfig { step: DEFAULT_STEP, tol: 1e-8, samples: 50, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct OrthogonalReconstruction {
    pub matrix: DMatrix<f64>,
    pub isometry: IsometryReport,
    /// ‖OᵀO − I‖_max
    pub orthogonality_residual: f64,
    /// max ‖T(v) − Ov‖ / ‖v‖ over sample points.
    pub reconstruction_residual: f64,
    /// Largest entrywise difference between O and the Jacobian at two
    /// further points.
    pub constancy_residual: f64,
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Recovers O as the Jacobian at the origin and verifies it globally.
pub fn reconstruct_orthogonal(t: &RealTransformation, config: &MazurUlamConfig) -> Result<OrthogonalReconstruction> {
    let n = t.dim();
    let isometry = check_isometry(t, config.samples.max(1), config.seed, config.tol)?;
    if !isometry.pass {
        return Err(Error::NotIsometry { max_deviation: isometry.max_deviation });
    }
    let origin = RealVector::zeros(n);
    let origin_norm = t.apply(&origin)?.norm();
    if origin_norm > config.tol {
        return Err(Error::OriginNotFixed { norm: origin_norm });
    }

    let eval = |x: &RealVector| t.apply(x);
    let matrix = real_jacobian(eval, &origin, config.step)?;
    let orthogonality_residual = max_abs(&(matrix.transpose() * &matrix - DMatrix::identity(n, n)));
    if !(orthogonality_residual < config.tol) {
        return Err(Error::NotOrthogonal { residual: orthogonality_residual });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut reconstruction_residual: f64 = 0.0;
    for _ in 0..config.samples.max(1) {
        let v = gaussian(n, &mut rng);
        let r = (t.apply(&v)? - &matrix * &v).norm() / v.norm();
        reconstruction_residual = reconstruction_residual.max(r);
    }
    if !(reconstruction_residual < config.tol) {
        return Err(Error::ReconstructionMismatch { stage: "global", residual: reconstruction_residual });
    }

    let mut constancy_residual: f64 = 0.0;
    for _ in 0..2 {
        let p = gaussian(n, &mut rng);
        let j = real_jacobian(eval, &p, config.step)?;
        constancy_residual = constancy_residual.max(max_abs(&(j - &matrix)));
    }
    if !(constancy_residual < config.tol) {
        return Err(Error::ReconstructionMismatch { stage: "jacobian_constancy", residual: constancy_residual });
    }

    Ok(OrthogonalReconstruction { matrix, isometry, orthogonality_residual, reconstruction_residual, constancy_residual })
}

/// max ‖T(Σ (e_ν·v) e_ν) − Σ (e_ν·v) T(e_ν)‖ over random v: linearity
/// measured directly through the basis expansion.
pub fn expansion_deviation(t: &RealTransformation, num_points: usize, seed: u64) -> Result<f64> {
    let n = t.dim();
    let images = (0..n)
        .map(|k| t.apply(&RealVector::from_fn(n, |i, _| if i == k { 1.0 } else { 0.0 })))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..num_points {
        let v = gaussian(n, &mut rng);
        let expanded = images.iter().enumerate().fold(RealVector::zeros(n), |acc, (k, img)| acc + img * v[k]);
        worst = worst.max((t.apply(&v)? - expanded).norm());
    }
    Ok(worst)
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the sign
/// of R's diagonal moved into Q).
pub fn random_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    let qr = a.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..n {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn rotation(angle: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[angle.cos(), -angle.sin(), angle.sin(), angle.cos()])
    }

    #[test]
    fn rotation_and_reflection_are_isometries() {
        let r = check_isometry(&RealTransformation::linear(rotation(FRAC_PI_4)), 50, 0, 1e-10).unwrap();
        assert!(r.pass && r.max_deviation < 1e-12);
        let refl = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(check_isometry(&RealTransformation::linear(refl), 50, 0, 1e-10).unwrap().pass);
    }

    #[test]
    fn translation_is_rejected() {
        let a = DVector::from_vec(vec![0.3, -1.0]);
        let t = RealTransformation::from_fn(2, move |x| x + &a);
        let report = check_isometry(&t, 10, 0, 1e-8).unwrap();
        // The (0, 0) pair alone contributes a·a.
        assert!(!report.pass && report.max_deviation >= 1.09 - 1e-12);
        assert!(matches!(reconstruct_orthogonal(&t, &MazurUlamConfig::default()), Err(Error::NotIsometry { .. })));
    }

    #[test]
    fn recovers_quarter_turn() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = DMatrix::from_row_slice(2, 2, &[s, -s, s, s]);
        let rec = reconstruct_orthogonal(&RealTransformation::linear(rotation(FRAC_PI_4)), &MazurUlamConfig::default()).unwrap();
        assert!(max_abs(&(rec.matrix - expected)) < 1e-9);
    }

    #[test]
    fn recovers_identity_and_random_orthogonal() {
        let rec = reconstruct_orthogonal(&RealTransformation::from_fn(3, |x| x.clone()), &MazurUlamConfig::default()).unwrap();
        assert!(max_abs(&(rec.matrix - DMatrix::identity(3, 3))) < 1e-12);

        let q = random_orthogonal(6, 42);
        let rec = reconstruct_orthogonal(&RealTransformation::linear(q.clone()), &MazurUlamConfig::default()).unwrap();
        assert!(max_abs(&(rec.matrix - q)) < 1e-9);
    }

    #[test]
    fn non_orthogonal_linear_map_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            reconstruct_orthogonal(&RealTransformation::linear(m), &MazurUlamConfig::default()),
            Err(Error::NotIsometry { .. })
        ));
    }

    #[test]
    fn expansion_identity_holds_for_orthogonal_maps() {
        let t = RealTransformation::linear(random_orthogonal(5, 3));
        assert!(expansion_deviation(&t, 20, 1).unwrap() < 1e-12);
        let warp = RealTransformation::from_fn(2, |x| x * (1.0 + x.norm_squared()));
        assert!(expansion_deviation(&warp, 5, 1).unwrap() > 1e-3);
    }
}
