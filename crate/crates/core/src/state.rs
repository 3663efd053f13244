//! State vectors in ℂⁿ and the dense complex matrices acting on them.
//!
//! Coordinates are taken in the canonical basis, so `z[ν]` is the amplitude
//! on the ν-th basis vector and the Hermitian product is `⟨w|z⟩ = Σ w̄_ν z_ν`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// A finite element of ℂⁿ with n ≥ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(DVector<Complex64>);

impl StateVector {
    pub fn new(components: Vec<Complex64>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(components))
    }

    pub fn from_vector(v: DVector<Complex64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidArgument("state dimension must be at least 1".into()));
        }
        if !v.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::NonFiniteEvaluation);
        }
        Ok(StateVector(v))
    }

    /// Builds a state from `(re, im)` pairs.
    pub fn from_parts(parts: &[(f64, f64)]) -> Result<Self> {
        Self::new(parts.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "state dimension must be at least 1");
        StateVector(DVector::zeros(n))
    }

    /// The canonical basis vector e_k (0-based).
    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[k] = Complex64::new(1.0, 0.0);
        v
    }

    /// Standard complex Gaussian: real and imaginary parts i.i.d. N(0, 1/2).
    pub fn random_gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = DVector::from_fn(n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * s, im * s)
        });
        StateVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &DVector<Complex64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<Complex64> {
        self.0
    }

    pub fn as_slice(&self) -> &[Complex64] {
        self.0.as_slice()
    }

    /// ⟨self|other⟩, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.0.dotc(&other.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn conj(&self) -> StateVector {
        StateVector(self.0.map(|c| c.conj()))
    }

    pub fn scale(&self, c: Complex64) -> StateVector {
        StateVector(&self.0 * c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub(crate) fn wrap_unchecked(v: DVector<Complex64>) -> Self {
        StateVector(v)
    }
}

impl std::ops::Index<usize> for StateVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

/// Largest entry modulus.
pub fn max_norm(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, c| acc.max(c.norm()))
}

/// ‖M*M − I‖_max.
pub fn unitarity_residual(m: &CMatrix) -> f64 {
    let n = m.ncols();
    let gram = m.adjoint() * m;
    max_norm(&(gram - CMatrix::identity(n, n)))
}

/// Draws an n×n matrix with i.i.d. standard complex Gaussian entries.
pub fn random_ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // Row-major draw order so the stream layout does not depend on storage order.
    let mut entries = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        entries.push(Complex64::new(re * s, im * s));
    }
    CMatrix::from_row_slice(n, n, &entries)
}
