use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{CMatrix, StateVector};

type Evaluator = dyn Fn(&StateVector) -> Result<StateVector> + Send + Sync;

/// A map z ↦ T(z, z̄) on ℂⁿ.
///
/// The evaluator must be deterministic and callable from several threads at
/// once. [`Transformation::apply`] enforces dimension preservation and
/// finiteness of every output.
#[derive(Clone)]
pub struct Transformation {
    evaluator: Arc<Evaluator>,
    dim: usize,
    source: Option<String>,
}

impl Transformation {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&StateVector) -> Result<StateVector> + Send + Sync + 'static,
    {
        assert!(dim >= 1, "transformation dimension must be at least 1");
        Transformation { evaluator: Arc::new(f), dim, source: None }
    }

    /// Wraps an infallible map on raw component vectors.
    pub fn from_fn<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&StateVector) -> StateVector + Send + Sync + 'static,
    {
        Self::new(dim, move |z| Ok(f(z)))
    }

    /// z ↦ M z.
    pub fn linear(m: CMatrix) -> Self {
        assert!(m.is_square(), "operator matrix must be square");
        Self::from_fn(m.nrows(), move |z| StateVector::wrap_unchecked(&m * z.as_vector()))
    }

    /// z ↦ M z̄.
    pub fn antilinear(m: CMatrix) -> Self {
        assert!(m.is_square(), "operator matrix must be square");
        Self::from_fn(m.nrows(), move |z| StateVector::wrap_unchecked(&m * z.conj().as_vector()))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |z| z.clone())
    }

    /// Componentwise complex conjugation.
    pub fn conjugation(dim: usize) -> Self {
        Self::from_fn(dim, |z| z.conj())
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    pub fn apply(&self, z: &StateVector) -> Result<StateVector> {
        if z.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: z.dim() });
        }
        let out = (self.evaluator)(z)?;
        if out.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: out.dim() });
        }
        if !out.as_slice().iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::NonFiniteEvaluation);
        }
        Ok(out)
    }

    /// `self ∘ inner`: z ↦ self(inner(z)).
    pub fn compose(&self, inner: &Transformation) -> Result<Transformation> {
        if self.dim != inner.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: inner.dim });
        }
        let (outer, inner) = (self.clone(), inner.clone());
        Ok(Transformation::new(self.dim, move |z| outer.apply(&inner.apply(z)?)))
    }

    /// Pointwise a·self + b·other.
    pub fn linear_combination(&self, a: Complex64, other: &Transformation, b: Complex64) -> Result<Transformation> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let (t1, t2) = (self.clone(), other.clone());
        Ok(Transformation::new(self.dim, move |z| {
            let v = t1.apply(z)?.into_vector() * a + t2.apply(z)?.into_vector() * b;
            Ok(StateVector::wrap_unchecked(v))
        }))
    }

    /// Componentwise conjugate of the output: z ↦ (T(z))*.
    pub fn conjugated(&self) -> Transformation {
        let t = self.clone();
        Transformation::new(self.dim, move |z| Ok(t.apply(z)?.conj()))
    }
}

impl fmt::Debug for Transformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Transformation")
            .field("dim", &self.dim)
            .field("source", &self.source)
            .finish_non_exhaustive()
    }
}
