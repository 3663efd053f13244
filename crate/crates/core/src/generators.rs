//! Seeded test transformations: Haar unitaries, smooth phase dressings,
//! linear and antilinear symmetries, and maps that violate probability
//! preservation.
//!
//! Generated symmetries come back as a [`Generated`] pair so the ground truth
//! never travels inside the [`Transformation`] handed to the classifier.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use crate::classifier::Branch as SymmetryKind;
use crate::error::{Error, Result};
use crate::state::{random_ginibre, unitarity_residual, CMatrix, StateVector};
use crate::transform::Transformation;

pub const MAX_DRESSING_DEGREE: u32 = 4;
const RIDGES: usize = 2;
const UNITARY_INPUT_TOL: f64 = 1e-10;

/// Haar-distributed n×n unitary.
///
/// QR of a complex Ginibre matrix, with each column of Q rescaled so that the
/// matching diagonal entry of R becomes real positive.
pub fn haar_unitary(n: usize, seed: u64) -> CMatrix {
    assert!(n >= 1, "dimension must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_unitary_from_rng(n, &mut rng)
}

pub fn haar_unitary_from_rng<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = random_ginibre(n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..n {
        let d = r[(k, k)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for v in q.column_mut(k).iter_mut() {
                *v *= phase;
            }
        }
    }
    q
}

/// One ridge term P(ℓ·x) of a dressing, where x = (Re z₁, Im z₁, …).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ridge {
    /// Unit vector in ℝ^{2n}.
    pub direction: Vec<f64>,
    /// Coefficients of P, constant term first.
    pub coefficients: Vec<f64>,
}

/// A smooth real phase α(z, z̄): a sum of polynomial ridge functions of the
/// 2n real coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DressingSpec {
    pub degree: u32,
    pub ridges: Vec<Ridge>,
    pub seed: u64,
}

impl DressingSpec {
    /// Coefficients uniform in [−1, 1], ridge directions uniform on the sphere.
    pub fn random(n: usize, degree: u32, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_from_rng(n, degree, seed, &mut rng)
    }

    fn random_from_rng<R: Rng + ?Sized>(n: usize, degree: u32, seed: u64, rng: &mut R) -> Result<Self> {
        if degree > MAX_DRESSING_DEGREE {
            return Err(Error::InvalidArgument(format!(
                "dressing degree must be at most {MAX_DRESSING_DEGREE}, got {degree}"
            )));
        }
        let count = if degree == 0 { 1 } else { RIDGES };
        let ridges = (0..count)
            .map(|_| {
                let raw: Vec<f64> = (0..2 * n).map(|_| rng.sample(StandardNormal)).collect();
                let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                let direction = raw.iter().map(|v| v / norm).collect();
                let coefficients = (0..=degree).map(|_| rng.random_range(-1.0..=1.0)).collect();
                Ridge { direction, coefficients }
            })
            .collect();
        Ok(DressingSpec { degree, ridges, seed })
    }

    pub fn dim(&self) -> usize {
        self.ridges.first().map_or(0, |r| r.direction.len() / 2)
    }

    pub fn evaluate(&self, z: &StateVector) -> f64 {
        self.ridges
            .iter()
            .map(|ridge| {
                let s: f64 = z
                    .as_slice()
                    .iter()
                    .zip(ridge.direction.chunks_exact(2))
                    .map(|(c, d)| c.re * d[0] + c.im * d[1])
                    .sum();
                ridge.coefficients.iter().rev().fold(0.0, |acc, &coef| acc * s + coef)
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryKind {
    Scaling,
    Shear,
    NormWarp,
    RankDeficient,
}

impl AdversaryKind {
    pub const ALL: [AdversaryKind; 4] =
        [AdversaryKind::Scaling, AdversaryKind::Shear, AdversaryKind::NormWarp, AdversaryKind::RankDeficient];
}

/// What a generated transformation really is.
#[derive(Debug, Clone, PartialEq)]
pub enum GroundTruth {
    Symmetry { kind: SymmetryKind, matrix: CMatrix, dressing: Option<DressingSpec> },
    Adversary { kind: AdversaryKind },
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub transformation: Transformation,
    pub truth: GroundTruth,
}

/// z ↦ e^{iα(z)} U z (linear) or z ↦ e^{iα(z)} U z̄ (antilinear).
pub fn make_symmetry(kind: SymmetryKind, u: &CMatrix, dressing: Option<&DressingSpec>) -> Result<Generated> {
    if !u.is_square() {
        return Err(Error::DimensionMismatch { expected: u.nrows(), found: u.ncols() });
    }
    let residual = unitarity_residual(u);
    if !(residual < UNITARY_INPUT_TOL) {
        return Err(Error::NotUnitaryInput { residual });
    }
    let n = u.nrows();
    if let Some(d) = dressing {
        if d.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: d.dim() });
        }
    }
    let (m, alpha) = (u.clone(), dressing.cloned());
    let transformation = Transformation::from_fn(n, move |z| {
        let image = match kind {
            SymmetryKind::Linear => &m * z.as_vector(),
            SymmetryKind::Antilinear => &m * z.conj().as_vector(),
        };
        let image = match &alpha {
            Some(a) => image * Complex64::from_polar(1.0, a.evaluate(z)),
            None => image,
        };
        StateVector::wrap_unchecked(image)
    });
    Ok(Generated {
        transformation,
        truth: GroundTruth::Symmetry { kind, matrix: u.clone(), dressing: dressing.cloned() },
    })
}

/// Haar unitary and dressing of the given degree from a single seed.
pub fn random_symmetry(kind: SymmetryKind, n: usize, degree: u32, seed: u64) -> Result<Generated> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = haar_unitary_from_rng(n, &mut rng);
    let dressing = DressingSpec::random_from_rng(n, degree, seed, &mut rng)?;
    make_symmetry(kind, &u, Some(&dressing))
}

/// I plus a unit shear in the (1, 2) slot and seeded strictly-upper entries.
pub fn shear_matrix(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = CMatrix::identity(n, n);
    for r in 0..n {
        for c in r + 1..n {
            s[(r, c)] = if (r, c) == (0, 1) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))
            };
        }
    }
    s
}

/// A smooth map that violates probability preservation on some pair.
pub fn make_adversary(kind: AdversaryKind, n: usize, seed: u64) -> Result<Generated> {
    let min_dim = match kind {
        AdversaryKind::Shear | AdversaryKind::RankDeficient => 2,
        AdversaryKind::Scaling | AdversaryKind::NormWarp => 1,
    };
    if n < min_dim {
        return Err(Error::InvalidArgument(format!("{kind:?} adversary needs dimension at least {min_dim}")));
    }
    let transformation = match kind {
        AdversaryKind::Scaling => Transformation::from_fn(n, |z| z.scale(Complex64::new(2.0, 0.0))),
        AdversaryKind::Shear => Transformation::linear(shear_matrix(n, seed)),
        AdversaryKind::NormWarp => {
            Transformation::from_fn(n, |z| z.scale(Complex64::new(1.0 + z.norm_squared(), 0.0)))
        }
        AdversaryKind::RankDeficient => Transformation::from_fn(n, |z| {
            let mut v = DVector::zeros(z.dim());
            v[0] = z[0];
            StateVector::wrap_unchecked(v)
        }),
    };
    Ok(Generated { transformation, truth: GroundTruth::Adversary { kind } })
}
