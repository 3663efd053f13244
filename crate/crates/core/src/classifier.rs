//! Probability-preservation checks and the linear/antilinear verdict.
//!
//! After gauge fixing, a symmetry T̃ is either z ↦ M z or z ↦ M z̄ with M
//! unitary, and M is read off the Wirtinger Jacobian at the origin: the
//! ∂_z block for the linear branch, the ∂_z̄ block for the antilinear one.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{gauge_fix, GaugeConfig, DEFAULT_PROBE_SCALE};
use crate::state::{max_norm, unitarity_residual, CMatrix, StateVector};
use crate::transform::Transformation;
use crate::wirtinger::{jacobian_with_levels, wirtinger_jacobian, DEFAULT_STEP};

/// Richardson levels used for the origin Jacobian.
pub const ORIGIN_RICHARDSON_LEVELS: u32 = 1;
const CONSTANCY_POINTS: usize = 3;
const GAUGE_REFERENCE_POINTS: usize = 3;

const STREAM_PRESERVATION: u64 = 0;
const STREAM_RECONSTRUCTION: u64 = 1;
const STREAM_CONSTANCY: u64 = 2;
const STREAM_GAUGE: u64 = 3;

fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Linear,
    Antilinear,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Linear => "linear",
            Branch::Antilinear => "antilinear",
        }
    }
}

/// One tested pair (w, z).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub label: String,
    pub w_norm: f64,
    pub z_norm: f64,
    /// |⟨w|z⟩|
    pub overlap_modulus: f64,
    /// |⟨Tw|Tz⟩|
    pub image_overlap_modulus: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreservationReport {
    pub pairs_tested: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub pairs: Vec<PairRecord>,
}

fn special_pairs<R: rand::Rng>(n: usize, rng: &mut R) -> Vec<(String, StateVector, StateVector)> {
    let zero = StateVector::zeros(n);
    let g = StateVector::random_gaussian(n, rng);
    let h = StateVector::random_gaussian(n, rng);
    let mut pairs = vec![
        ("zero_zero".to_owned(), zero.clone(), zero.clone()),
        ("zero_random".to_owned(), zero, g.clone()),
    ];
    for k in 0..n {
        pairs.push((format!("basis_{k}_{k}"), StateVector::basis(n, k), StateVector::basis(n, k)));
        if n > 1 {
            let next = (k + 1) % n;
            pairs.push((format!("basis_{k}_{next}"), StateVector::basis(n, k), StateVector::basis(n, next)));
        }
    }
    if n > 1 {
        // h minus its projection on g.
        let coef = g.inner(&h) / g.norm_squared();
        let ortho = StateVector::wrap_unchecked(h.as_vector() - g.as_vector() * coef);
        pairs.push(("orthogonal".to_owned(), g.clone(), ortho));
    }
    pairs.push(("parallel".to_owned(), g.clone(), g.clone()));
    pairs.push(("parallel_scaled".to_owned(), g.clone(), g.scale(Complex64::new(-0.6, 1.3))));
    pairs
}

/// Samples pairs and measures | |⟨Tw|Tz⟩| − |⟨w|z⟩| |.
///
/// The sample holds `num_pairs` standard complex Gaussian pairs plus fixed
/// special pairs (origin, basis vectors, an orthogonal and a parallel pair).
pub fn check_preservation(t: &Transformation, num_pairs: usize, seed: u64, tol: f64) -> Result<PreservationReport> {
    if num_pairs == 0 {
        return Err(Error::InvalidArgument("num_pairs must be at least 1".into()));
    }
    let n = t.dim();
    let mut rng = rng_stream(seed, STREAM_PRESERVATION);
    let mut pairs = special_pairs(n, &mut rng);
    for i in 0..num_pairs {
        let w = StateVector::random_gaussian(n, &mut rng);
        let z = StateVector::random_gaussian(n, &mut rng);
        pairs.push((format!("random_{i}"), w, z));
    }
    let records = pairs
        .into_par_iter()
        .map(|(label, w, z)| {
            let overlap_modulus = w.inner(&z).norm();
            let image_overlap_modulus = t.apply(&w)?.inner(&t.apply(&z)?).norm();
            Ok(PairRecord {
                label,
                w_norm: w.norm(),
                z_norm: z.norm(),
                overlap_modulus,
                image_overlap_modulus,
                deviation: (image_overlap_modulus - overlap_modulus).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_deviation = records.iter().map(|r| r.deviation).fold(0.0, f64::max);
    Ok(PreservationReport {
        pairs_tested: records.len(),
        max_deviation,
        tolerance: tol,
        pass: max_deviation < tol,
        pairs: records,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseAlignment {
    pub phase: f64,
    pub aligned_residual: f64,
}

/// Finds the global phase φ with M ≈ e^{iφ} R.
///
/// φ is read at the largest-modulus entry of `reference`; the residual is
/// ‖e^{−iφ} M − R‖_max.
pub fn align_global_phase(m: &CMatrix, reference: &CMatrix) -> Result<PhaseAlignment> {
    if m.shape() != reference.shape() {
        return Err(Error::DimensionMismatch { expected: reference.nrows(), found: m.nrows() });
    }
    let mut best = (0, 0);
    let mut best_mod = -1.0;
    for r in 0..reference.nrows() {
        for c in 0..reference.ncols() {
            let v = reference[(r, c)].norm();
            if v > best_mod {
                best_mod = v;
                best = (r, c);
            }
        }
    }
    if !(best_mod > 1e-8) {
        return Err(Error::ZeroReference);
    }
    let phase = (m[best] / reference[best]).arg();
    let aligned_residual = max_norm(&(m * Complex64::from_polar(1.0, -phase) - reference));
    Ok(PhaseAlignment { phase, aligned_residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub step: f64,
    pub tol_preserve: f64,
    pub tol_unitary: f64,
    pub tol_branch: f64,
    pub samples: usize,
    pub seed: u64,
    pub probe_scale: f64,
    pub max_dim: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            step: DEFAULT_STEP,
            tol_preserve: 1e-8,
            tol_unitary: 1e-6,
            tol_branch: 1e-4,
            samples: 50,
            seed: 0,
            probe_scale: DEFAULT_PROBE_SCALE,
            max_dim: 64,
        }
    }
}

impl ClassifyConfig {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("step", self.step),
            ("tol_preserve", self.tol_preserve),
            ("tol_unitary", self.tol_unitary),
            ("tol_branch", self.tol_branch),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.samples == 0 {
            return Err(Error::InvalidArgument("samples must be at least 1".into()));
        }
        Ok(())
    }
}

/// Step-halving behaviour of the origin Jacobian of T̃.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessDiagnostic {
    /// max-norm change from h to h/2 and from h/2 to h/4.
    pub differences: [f64; 2],
    /// differences[0] / differences[1]; about 4 for a smooth map with
    /// visible truncation error, absent when the second difference is zero.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Caveat {
    /// On ℂ¹ every symmetry is a phase map, so the two branches describe the
    /// same ray map and the verdict carries no invariant meaning.
    SingleDimension,
}

#[derive(Debug, Clone)]
pub struct ClassificationResult {
    pub branch: Branch,
    /// Û for the linear branch (T̃ z = M z), the matrix of Â for the
    /// antilinear branch (T̃ z = M z̄).
    pub operator: CMatrix,
    pub unitarity_residual: f64,
    pub reconstruction_residual: f64,
    /// Largest deviation of the Jacobian at non-origin points from `operator`
    /// after phase alignment, including the size of the vanishing block.
    pub constancy_residual: f64,
    pub d_z_max: f64,
    pub d_zbar_max: f64,
    pub gauge_reference_theta: f64,
    pub smoothness: SmoothnessDiagnostic,
    pub preservation: PreservationReport,
    pub caveats: Vec<Caveat>,
}

fn smoothness(t: &Transformation, step: f64) -> Result<SmoothnessDiagnostic> {
    let origin = StateVector::zeros(t.dim());
    let js = [step, step / 2.0, step / 4.0]
        .iter()
        .map(|&h| wirtinger_jacobian(t, &origin, h))
        .collect::<Result<Vec<_>>>()?;
    let diff = |a: usize, b: usize| {
        max_norm(&(&js[a].d_z - &js[b].d_z)).max(max_norm(&(&js[a].d_zbar - &js[b].d_zbar)))
    };
    let differences = [diff(0, 1), diff(1, 2)];
    let ratio = (differences[1] > 0.0).then(|| differences[0] / differences[1]);
    Ok(SmoothnessDiagnostic { differences, ratio })
}

fn apply_operator(branch: Branch, m: &CMatrix, z: &StateVector) -> nalgebra::DVector<Complex64> {
    match branch {
        Branch::Linear => m * z.as_vector(),
        Branch::Antilinear => m * z.conj().as_vector(),
    }
}

fn random_nonzero(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    loop {
        let z = StateVector::random_gaussian(n, rng);
        if z.norm() > 1e-3 {
            return z;
        }
    }
}

/// Decides the branch of a probability-preserving T and reconstructs its
/// operator.
pub fn classify(t: &Transformation, config: &ClassifyConfig) -> Result<ClassificationResult> {
    config.validate()?;
    let n = t.dim();
    if n > config.max_dim {
        return Err(Error::InvalidArgument(format!("dimension {n} exceeds the cap {}", config.max_dim)));
    }

    let preservation = check_preservation(t, config.samples, config.seed, config.tol_preserve)?;
    if !preservation.pass {
        return Err(Error::NotASymmetry(Box::new(preservation)));
    }

    let gauge_config = GaugeConfig {
        probe_scale: config.probe_scale,
        seed: rng_seed(config.seed, STREAM_GAUGE),
        ..GaugeConfig::default()
    };
    let fixed = gauge_fix(t, &gauge_config, GAUGE_REFERENCE_POINTS)?;
    let tt = fixed.transformation();

    let origin = StateVector::zeros(n);
    let jac = jacobian_with_levels(tt, &origin, config.step, ORIGIN_RICHARDSON_LEVELS)?;
    let (d_z_max, d_zbar_max) = (jac.d_z_max(), jac.d_zbar_max());
    let (branch, operator) = match (d_z_max < config.tol_branch, d_zbar_max < config.tol_branch) {
        (false, true) => (Branch::Linear, jac.d_z),
        (true, false) => (Branch::Antilinear, jac.d_zbar),
        _ => return Err(Error::MixedBranch { d_z_max, d_zbar_max }),
    };
    let unitarity = unitarity_residual(&operator);
    if !(unitarity < config.tol_unitary) {
        return Err(Error::NotUnitary { residual: unitarity });
    }

    let mut rng = rng_stream(config.seed, STREAM_RECONSTRUCTION);
    let points: Vec<StateVector> = (0..config.samples).map(|_| random_nonzero(n, &mut rng)).collect();
    let reconstruction_residual = points
        .par_iter()
        .map(|z| {
            let image = tt.apply(z)?.into_vector();
            Ok((image - apply_operator(branch, &operator, z)).norm() / z.norm())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    if !(reconstruction_residual < config.tol_unitary) {
        return Err(Error::ReconstructionMismatch { stage: "global", residual: reconstruction_residual });
    }

    let mut rng = rng_stream(config.seed, STREAM_CONSTANCY);
    let points: Vec<StateVector> = (0..CONSTANCY_POINTS).map(|_| random_nonzero(n, &mut rng)).collect();
    let constancy_residual = points
        .par_iter()
        .map(|p| {
            let j = wirtinger_jacobian(tt, p, config.step)?;
            let (block, other) = match branch {
                Branch::Linear => (j.d_z, j.d_zbar),
                Branch::Antilinear => (j.d_zbar, j.d_z),
            };
            let aligned = align_global_phase(&block, &operator)?.aligned_residual;
            Ok(aligned.max(max_norm(&other)))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    if !(constancy_residual < config.tol_branch) {
        return Err(Error::ReconstructionMismatch { stage: "jacobian_constancy", residual: constancy_residual });
    }

    let smoothness = smoothness(tt, config.step)?;
    let caveats = if n == 1 { vec![Caveat::SingleDimension] } else { Vec::new() };

    Ok(ClassificationResult {
        branch,
        operator,
        unitarity_residual: unitarity,
        reconstruction_residual,
        constancy_residual,
        d_z_max,
        d_zbar_max,
        gauge_reference_theta: fixed.reference_theta_max,
        smoothness,
        preservation,
        caveats,
    })
}

fn rng_seed(seed: u64, stream: u64) -> u64 {
    use rand::RngCore;
    rng_stream(seed, stream).next_u64()
}
