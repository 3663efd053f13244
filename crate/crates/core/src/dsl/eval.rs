use std::sync::Arc;

use num_complex::Complex64;

use super::ast::{BinOp, Expr, ExprKind, Func};
use super::{Constants, TransformSpec};
use crate::error::{Error, Result};
use crate::state::StateVector;
use crate::transform::Transformation;

/// Divisors with modulus below this are rejected.
pub const DIVISION_THRESHOLD: f64 = 1e-300;

/// Evaluates one output expression; `row` is the 1-based output index used
/// by `mat(NAME)` without an explicit row.
pub fn evaluate_expr(e: &Expr, z: &StateVector, row: usize, constants: &Constants) -> Result<Complex64> {
    let ev = |x: &Expr| evaluate_expr(x, z, row, constants);
    Ok(match &e.kind {
        ExprKind::Literal(c) => *c,
        ExprKind::Var(k) => z[k - 1],
        ExprKind::Neg(a) => -ev(a)?,
        ExprKind::Binary(op, a, b) => {
            let (x, y) = (ev(a)?, ev(b)?);
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y.norm() < DIVISION_THRESHOLD {
                        return Err(Error::DivisionNearZero { modulus: y.norm() });
                    }
                    x / y
                }
            }
        }
        ExprKind::Call(func, a) => {
            let x = ev(a)?;
            match func {
                Func::Conj => x.conj(),
                Func::Re => Complex64::new(x.re, 0.0),
                Func::Im => Complex64::new(x.im, 0.0),
                Func::Abs2 => Complex64::new(x.norm_sqr(), 0.0),
                Func::Exp => x.exp(),
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Expi => (Complex64::i() * x).exp(),
            }
        }
        ExprKind::Norm2 => Complex64::new(z.norm_squared(), 0.0),
        ExprKind::Mat { name, row: explicit, conj } => {
            let m = constants.get(name).ok_or_else(|| Error::UnknownMatrix(name.clone()))?;
            let r = explicit.unwrap_or(row) - 1;
            if m.nrows() != z.dim() || m.ncols() != z.dim() {
                return Err(Error::DimensionMismatch { expected: z.dim(), found: m.nrows().max(m.ncols()) });
            }
            m.row(r)
                .iter()
                .zip(z.as_slice())
                .map(|(a, b)| if *conj { a * b.conj() } else { a * b })
                .sum()
        }
    })
}

/// Evaluates a spec that references no matrices.
pub fn evaluate(spec: &TransformSpec, z: &StateVector) -> Result<StateVector> {
    evaluate_with(spec, z, &Constants::new())
}

fn evaluate_with(spec: &TransformSpec, z: &StateVector, constants: &Constants) -> Result<StateVector> {
    if z.dim() != spec.dim {
        return Err(Error::DimensionMismatch { expected: spec.dim, found: z.dim() });
    }
    let values = spec
        .outputs
        .iter()
        .enumerate()
        .map(|(k, e)| evaluate_expr(e, z, k + 1, constants))
        .collect::<Result<Vec<_>>>()?;
    StateVector::new(values)
}

/// Binds the referenced matrices and wraps the spec as a [`Transformation`].
pub fn compile_to_transformation(spec: &TransformSpec, constants: &Constants) -> Result<Transformation> {
    let mut bound = Constants::new();
    for name in spec.matrix_names() {
        let m = constants.get(&name).ok_or_else(|| Error::UnknownMatrix(name.clone()))?;
        if m.nrows() != spec.dim || m.ncols() != spec.dim {
            return Err(Error::DimensionMismatch { expected: spec.dim, found: m.nrows().max(m.ncols()) });
        }
        bound.insert(name, m.clone());
    }
    let shared = Arc::new((spec.clone(), bound));
    let evaluator = Arc::clone(&shared);
    Ok(Transformation::new(spec.dim, move |z| evaluate_with(&evaluator.0, z, &evaluator.1))
        .with_source(shared.0.source.clone()))
}
