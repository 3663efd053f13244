//! Numerical Wirtinger calculus.
//!
//! A map T on ℂⁿ is probed along the 2n real directions x_ν = Re z_ν and
//! y_ν = Im z_ν with central differences, and the real partials are combined
//! into
//!
//! ```text
//! ∂_z T = ½ (∂_x − i ∂_y) T        ∂_z̄ T = ½ (∂_x + i ∂_y) T
//! ```
//!
//! Column ν of each matrix is the derivative with respect to the ν-th
//! coordinate; row index is the output component. T is analytic exactly
//! when the ∂_z̄ block vanishes.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::state::{max_norm, CMatrix, StateVector};
use crate::transform::Transformation;

pub const DEFAULT_STEP: f64 = 1e-5;
pub const MAX_RICHARDSON_LEVELS: u32 = 4;

/// The pair (∂_z T, ∂_z̄ T) at a point.
#[derive(Debug, Clone)]
pub struct WirtingerJacobian {
    pub d_z: CMatrix,
    pub d_zbar: CMatrix,
    pub at: StateVector,
    pub step: f64,
    /// Richardson extrapolation levels applied (0 = plain central differences).
    pub levels: u32,
}

impl WirtingerJacobian {
    pub fn d_z_max(&self) -> f64 {
        max_norm(&self.d_z)
    }

    pub fn d_zbar_max(&self) -> f64 {
        max_norm(&self.d_zbar)
    }
}

fn check_step(step: f64) -> Result<()> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive and finite, got {step}")));
    }
    Ok(())
}

/// Central difference of `t` at `at` along coordinate `nu`, real part when
/// `imaginary` is false. The divisor is the representable distance between
/// the two probes, not 2h, so maps that are exactly linear differentiate
/// exactly.
fn partial(t: &Transformation, at: &StateVector, nu: usize, imaginary: bool, step: f64) -> Result<DVector<Complex64>> {
    let base = at[nu];
    let (plus, minus, delta) = if imaginary {
        let (p, m) = (base.im + step, base.im - step);
        (Complex64::new(base.re, p), Complex64::new(base.re, m), p - m)
    } else {
        let (p, m) = (base.re + step, base.re - step);
        (Complex64::new(p, base.im), Complex64::new(m, base.im), p - m)
    };
    let mut zp = at.as_vector().clone();
    zp[nu] = plus;
    let mut zm = at.as_vector().clone();
    zm[nu] = minus;
    let fp = t.apply(&StateVector::wrap_unchecked(zp))?;
    let fm = t.apply(&StateVector::wrap_unchecked(zm))?;
    Ok((fp.into_vector() - fm.into_vector()) / Complex64::new(delta, 0.0))
}

/// Wirtinger Jacobian pair with plain central differences (4n evaluations).
pub fn wirtinger_jacobian(t: &Transformation, at: &StateVector, step: f64) -> Result<WirtingerJacobian> {
    check_step(step)?;
    let n = t.dim();
    if at.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: at.dim() });
    }
    let half = Complex64::new(0.5, 0.0);
    let i = Complex64::i();
    let columns = (0..n)
        .into_par_iter()
        .map(|nu| {
            let dx = partial(t, at, nu, false, step)?;
            let dy = partial(t, at, nu, true, step)?;
            let dz = (&dx - &dy * i) * half;
            let dzbar = (dx + dy * i) * half;
            Ok((dz, dzbar))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut d_z = CMatrix::zeros(n, n);
    let mut d_zbar = CMatrix::zeros(n, n);
    for (nu, (dz, dzbar)) in columns.into_iter().enumerate() {
        d_z.set_column(nu, &dz);
        d_zbar.set_column(nu, &dzbar);
    }
    Ok(WirtingerJacobian { d_z, d_zbar, at: at.clone(), step, levels: 0 })
}

/// Richardson-extrapolated Jacobian pair from steps h, h/2, …, h/2^levels.
///
/// Central differences have an error expansion in even powers of h, so each
/// level removes one more term and raises the order by two.
pub fn richardson_refine(t: &Transformation, at: &StateVector, base_step: f64, levels: u32) -> Result<WirtingerJacobian> {
    if !(1..=MAX_RICHARDSON_LEVELS).contains(&levels) {
        return Err(Error::InvalidArgument(format!(
            "richardson levels must be in 1..={MAX_RICHARDSON_LEVELS}, got {levels}"
        )));
    }
    check_step(base_step)?;
    let mut table: Vec<(CMatrix, CMatrix)> = Vec::with_capacity(levels as usize + 1);
    for k in 0..=levels {
        let j = wirtinger_jacobian(t, at, base_step / f64::powi(2.0, k as i32))?;
        table.push((j.d_z, j.d_zbar));
    }
    // In-place Neville-style tableau: after pass `j`, entries k ≥ j hold
    // estimates of order 2(j+1).
    for j in 1..=levels as usize {
        let factor = Complex64::new(f64::powi(4.0, j as i32) - 1.0, 0.0);
        for k in (j..table.len()).rev() {
            let (prev_z, prev_zbar) = table[k - 1].clone();
            let (cur_z, cur_zbar) = &mut table[k];
            *cur_z = &*cur_z + (&*cur_z - prev_z) / factor;
            *cur_zbar = &*cur_zbar + (&*cur_zbar - prev_zbar) / factor;
        }
    }
    let (d_z, d_zbar) = table.pop().expect("tableau is non-empty");
    Ok(WirtingerJacobian { d_z, d_zbar, at: at.clone(), step: base_step, levels })
}

/// Plain differences for `levels == 0`, Richardson otherwise.
pub fn jacobian_with_levels(t: &Transformation, at: &StateVector, step: f64, levels: u32) -> Result<WirtingerJacobian> {
    if levels == 0 {
        wirtinger_jacobian(t, at, step)
    } else {
        richardson_refine(t, at, step, levels)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointAnalyticity {
    pub d_zbar_max: f64,
    pub analytic: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticityReport {
    pub points: Vec<PointAnalyticity>,
    pub analytic: bool,
    pub tolerance: f64,
}

/// Tests ∂_z̄ T = 0 at each point: analytic there iff ‖∂_z̄ T‖_max < tol.
pub fn analyticity_test(t: &Transformation, points: &[StateVector], tol: f64, step: f64) -> Result<AnalyticityReport> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("analyticity test needs at least one point".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let per_point = points
        .par_iter()
        .map(|p| {
            let d_zbar_max = wirtinger_jacobian(t, p, step)?.d_zbar_max();
            Ok(PointAnalyticity { d_zbar_max, analytic: d_zbar_max < tol })
        })
        .collect::<Result<Vec<_>>>()?;
    let analytic = per_point.iter().all(|p| p.analytic);
    Ok(AnalyticityReport { points: per_point, analytic, tolerance: tol })
}

/// Central-difference Jacobian of a real map, the real-restricted form of
/// [`wirtinger_jacobian`] (only x-directions are probed).
pub fn real_jacobian<F>(f: F, at: &DVector<f64>, step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>> + Sync,
{
    check_step(step)?;
    let n = at.len();
    let columns = (0..n)
        .into_par_iter()
        .map(|nu| {
            let (p, m) = (at[nu] + step, at[nu] - step);
            let mut xp = at.clone();
            xp[nu] = p;
            let mut xm = at.clone();
            xm[nu] = m;
            let (fp, fm) = (f(&xp)?, f(&xm)?);
            if fp.len() != n || fm.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: fp.len().max(fm.len()) });
            }
            if !fp.iter().chain(fm.iter()).all(|v| v.is_finite()) {
                return Err(Error::NonFiniteEvaluation);
            }
            Ok((fp - fm) / (p - m))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut jac = DMatrix::zeros(n, n);
    for (nu, col) in columns.into_iter().enumerate() {
        jac.set_column(nu, &col);
    }
    Ok(jac)
}
