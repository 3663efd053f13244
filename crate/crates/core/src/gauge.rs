//! The phase function θ and phase gauge fixing.
//!
//! For a probability-preserving T the number
//!
//! ```text
//! Z(w, z) = ⟨T(w)|T(z)⟩ / ⟨w|z⟩
//! ```
//!
//! is unimodular whenever ⟨w|z⟩ ≠ 0. Branch A reads θ = arg Z, branch B reads
//! θ = arg Z̄. Exchanging w and z conjugates Z, so θ is antisymmetric.
//!
//! Gauge fixing multiplies T(z) by e^{iα(z)} with α(z) = −θ(0, z), which makes
//! the phase measured against the origin vanish. The limit w → 0 is taken
//! along w = εz, which keeps ⟨w|z⟩ = ε‖z‖² away from zero, and is
//! Richardson-extrapolated from ε, ε/2 and ε/4.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use parking_lot::RwLock;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::phase;
use crate::state::StateVector;
use crate::transform::Transformation;

pub const DEFAULT_PROBE_SCALE: f64 = 1e-4;
/// Pairs with |⟨w|z⟩| ≤ this · ‖w‖‖z‖ are treated as orthogonal.
pub const DEGENERATE_PAIR_THRESHOLD: f64 = 1e-8;
pub const DEFAULT_MODULUS_TOL: f64 = 1e-6;
pub const DEFAULT_ORIGIN_TOL: f64 = 1e-8;

const CACHE_LIMIT: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhaseBranch {
    A,
    B,
}

/// One measured value of θ(w, w̄, z, z̄).
#[derive(Debug, Clone)]
pub struct PhaseSample {
    pub w: StateVector,
    pub z: StateVector,
    /// Radians in (−π, π].
    pub theta: f64,
    pub branch: PhaseBranch,
    /// |⟨w|z⟩|.
    pub overlap_modulus: f64,
    /// |Z|, which is 1 for a probability-preserving map.
    pub modulus: f64,
}

fn phase_ratio(t: &Transformation, w: &StateVector, z: &StateVector, modulus_tol: f64) -> Result<(Complex64, f64)> {
    let overlap = w.inner(z);
    let threshold = DEGENERATE_PAIR_THRESHOLD * w.norm() * z.norm();
    if overlap.norm() <= threshold {
        return Err(Error::DegeneratePair { overlap: overlap.norm(), threshold });
    }
    let ratio = t.apply(w)?.inner(&t.apply(z)?) / overlap;
    let modulus = ratio.norm();
    if !((modulus - 1.0).abs() <= modulus_tol) {
        return Err(Error::NotProbabilityPreserving { modulus });
    }
    Ok((ratio, overlap.norm()))
}

/// Measures θ(w, z) on the requested branch.
pub fn extract_theta(t: &Transformation, w: &StateVector, z: &StateVector, branch: PhaseBranch) -> Result<PhaseSample> {
    extract_theta_with_tol(t, w, z, branch, DEFAULT_MODULUS_TOL)
}

pub fn extract_theta_with_tol(
    t: &Transformation,
    w: &StateVector,
    z: &StateVector,
    branch: PhaseBranch,
    modulus_tol: f64,
) -> Result<PhaseSample> {
    let (ratio, overlap_modulus) = phase_ratio(t, w, z, modulus_tol)?;
    let theta = match branch {
        PhaseBranch::A => ratio.arg(),
        PhaseBranch::B => ratio.conj().arg(),
    };
    Ok(PhaseSample {
        w: w.clone(),
        z: z.clone(),
        theta: phase::wrap(theta),
        branch,
        overlap_modulus,
        modulus: ratio.norm(),
    })
}

#[derive(Debug, Clone)]
pub struct AntisymmetryReport {
    /// Wrap-aware |θ(w, z) + θ(z, w)| per pair.
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks θ(z, w) = −θ(w, z) on every pair (branch A).
pub fn verify_theta_antisymmetry(t: &Transformation, pairs: &[(StateVector, StateVector)], tol: f64) -> Result<AntisymmetryReport> {
    let deviations = pairs
        .iter()
        .map(|(w, z)| {
            let forward = extract_theta(t, w, z, PhaseBranch::A)?.theta;
            let backward = extract_theta(t, z, w, PhaseBranch::A)?.theta;
            Ok(phase::distance(forward, -backward))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    Ok(AntisymmetryReport { deviations, max_deviation, tolerance: tol, pass: max_deviation < tol })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeConfig {
    /// ε in the probe direction w = εz.
    pub probe_scale: f64,
    /// Combine the ε, ε/2 and ε/4 probes into a second-order-corrected limit.
    pub extrapolate: bool,
    pub origin_tol: f64,
    pub modulus_tol: f64,
    /// Seed for the reference points used to check the fixed gauge.
    pub seed: u64,
}

impl Default for GaugeConfig {
    fn default() -> Self {
        GaugeConfig {
            probe_scale: DEFAULT_PROBE_SCALE,
            extrapolate: true,
            origin_tol: DEFAULT_ORIGIN_TOL,
            modulus_tol: DEFAULT_MODULUS_TOL,
            seed: 0,
        }
    }
}

struct Gauge {
    base: Transformation,
    config: GaugeConfig,
    cache: RwLock<HashMap<Vec<u64>, f64>>,
}

impl Gauge {
    /// −arg ⟨T(εz)|T(z)⟩, with the modulus of the normalized ratio checked.
    fn probe(&self, z: &StateVector, tz: &StateVector, eps: f64) -> Result<f64> {
        let tw = self.base.apply(&z.scale(Complex64::new(eps, 0.0)))?;
        let ratio = tw.inner(tz) / (eps * z.norm_squared());
        let modulus = ratio.norm();
        if !((modulus - 1.0).abs() <= self.config.modulus_tol) {
            return Err(Error::NotProbabilityPreserving { modulus });
        }
        Ok(-ratio.arg())
    }

    fn alpha_given_image(&self, z: &StateVector, tz: &StateVector) -> Result<f64> {
        if z.is_zero() {
            return Ok(0.0);
        }
        let key: Vec<u64> = z.as_slice().iter().flat_map(|c| [c.re.to_bits(), c.im.to_bits()]).collect();
        if let Some(&alpha) = self.cache.read().get(&key) {
            return Ok(alpha);
        }
        let eps = self.config.probe_scale;
        let full = self.probe(z, tz, eps)?;
        let alpha = if self.config.extrapolate {
            // Richardson on ε, ε/2, ε/4 with offsets taken relative to the ε probe.
            let d1 = phase::wrap(self.probe(z, tz, 0.5 * eps)? - full);
            let d2 = phase::wrap(self.probe(z, tz, 0.25 * eps)? - full);
            phase::wrap(full + (8.0 * d2 - 6.0 * d1) / 3.0)
        } else {
            full
        };
        let mut cache = self.cache.write();
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, alpha);
        Ok(alpha)
    }

    fn apply(&self, z: &StateVector) -> Result<StateVector> {
        let tz = self.base.apply(z)?;
        if z.is_zero() {
            return Ok(StateVector::zeros(z.dim()));
        }
        let alpha = self.alpha_given_image(z, &tz)?;
        Ok(tz.scale(Complex64::from_polar(1.0, alpha)))
    }
}

/// T̃(z) = e^{iα(z)} T(z) with θ̃(0, z) = 0.
#[derive(Clone)]
pub struct GaugeFixedTransformation {
    gauge: Arc<Gauge>,
    fixed: Transformation,
    /// Largest |θ̃(0, z)| measured at the reference points after fixing.
    pub reference_theta_max: f64,
}

impl GaugeFixedTransformation {
    pub fn base(&self) -> &Transformation {
        &self.gauge.base
    }

    pub fn config(&self) -> &GaugeConfig {
        &self.gauge.config
    }

    /// The gauge-fixed map as a plain transformation.
    pub fn transformation(&self) -> &Transformation {
        &self.fixed
    }

    /// α(z); zero at the origin.
    pub fn alpha(&self, z: &StateVector) -> Result<f64> {
        let tz = self.gauge.base.apply(z)?;
        self.gauge.alpha_given_image(z, &tz)
    }

    pub fn apply(&self, z: &StateVector) -> Result<StateVector> {
        self.fixed.apply(z)
    }
}

impl std::fmt::Debug for GaugeFixedTransformation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GaugeFixedTransformation")
            .field("base", &self.gauge.base)
            .field("config", &self.gauge.config)
            .field("reference_theta_max", &self.reference_theta_max)
            .finish()
    }
}

/// Removes the phase freedom of T against the origin.
///
/// Requires T(0) ≈ 0. `reference_samples` random points are used to measure
/// the residual θ̃(0, z) of the fixed map.
pub fn gauge_fix(t: &Transformation, config: &GaugeConfig, reference_samples: usize) -> Result<GaugeFixedTransformation> {
    if !(1e-8..=1e-2).contains(&config.probe_scale) {
        return Err(Error::InvalidArgument(format!(
            "probe scale must lie in [1e-8, 1e-2], got {}",
            config.probe_scale
        )));
    }
    let n = t.dim();
    let origin_norm = t.apply(&StateVector::zeros(n))?.norm();
    if origin_norm > config.origin_tol {
        return Err(Error::OriginNotFixed { norm: origin_norm });
    }

    let gauge = Arc::new(Gauge { base: t.clone(), config: *config, cache: RwLock::new(HashMap::new()) });
    let evaluator = Arc::clone(&gauge);
    let mut fixed = Transformation::new(n, move |z| evaluator.apply(z));
    if let Some(src) = t.source() {
        fixed = fixed.with_source(src.to_owned());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let probe = Gauge { base: fixed.clone(), config: *config, cache: RwLock::new(HashMap::new()) };
    let mut reference_theta_max: f64 = 0.0;
    for _ in 0..reference_samples {
        let z = StateVector::random_gaussian(n, &mut rng);
        let tz = fixed.apply(&z)?;
        // α of the fixed map is −θ̃(0, z).
        reference_theta_max = reference_theta_max.max(probe.alpha_given_image(&z, &tz)?.abs());
    }

    Ok(GaugeFixedTransformation { gauge, fixed, reference_theta_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::haar_unitary;
    use crate::state::CMatrix;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn dressed_by_re_z1(u: CMatrix) -> Transformation {
        Transformation::from_fn(u.nrows(), move |z| {
            StateVector::wrap_unchecked(&u * z.as_vector() * Complex64::from_polar(1.0, z[0].re))
        })
    }

    #[test]
    fn theta_vanishes_for_unitaries() {
        let t = Transformation::linear(haar_unitary(3, 5));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let w = StateVector::random_gaussian(3, &mut rng);
            let z = StateVector::random_gaussian(3, &mut rng);
            let s = extract_theta(&t, &w, &z, PhaseBranch::A).unwrap();
            assert!(s.theta.abs() < 1e-10);
            assert!((s.modulus - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn theta_of_dressed_unitary() {
        // Oracle: phases cancel except α(z) − α(w) = 1 − 1/√2.
        let t = dressed_by_re_z1(haar_unitary(2, 8));
        let w = StateVector::from_parts(&[(FRAC_1_SQRT_2, 0.0), (FRAC_1_SQRT_2, 0.0)]).unwrap();
        let z = StateVector::from_parts(&[(1.0, 0.0), (0.0, 0.0)]).unwrap();
        let expected = 1.0 - FRAC_1_SQRT_2;
        let s = extract_theta(&t, &w, &z, PhaseBranch::A).unwrap();
        assert!((s.theta - expected).abs() < 1e-9);
        let swapped = extract_theta(&t, &z, &w, PhaseBranch::A).unwrap();
        assert!((swapped.theta + expected).abs() < 1e-9);
    }

    #[test]
    fn branches_are_conjugate() {
        let t = dressed_by_re_z1(haar_unitary(3, 2));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let w = StateVector::random_gaussian(3, &mut rng);
            let z = StateVector::random_gaussian(3, &mut rng);
            let a = extract_theta(&t, &w, &z, PhaseBranch::A).unwrap().theta;
            let b = extract_theta(&t, &w, &z, PhaseBranch::B).unwrap().theta;
            assert!(phase::distance(a, -b) < 1e-12);
        }
    }

    #[test]
    fn orthogonal_pair_is_degenerate() {
        let t = Transformation::identity(2);
        let e1 = StateVector::basis(2, 0);
        let e2 = StateVector::basis(2, 1);
        assert!(matches!(extract_theta(&t, &e1, &e2, PhaseBranch::A), Err(Error::DegeneratePair { .. })));
        let zero = StateVector::zeros(2);
        assert!(matches!(extract_theta(&t, &zero, &e2, PhaseBranch::A), Err(Error::DegeneratePair { .. })));
    }

    #[test]
    fn scaling_is_not_preserving() {
        let t = Transformation::from_fn(2, |z| z.scale(Complex64::new(2.0, 0.0)));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pairs = vec![(StateVector::random_gaussian(2, &mut rng), StateVector::random_gaussian(2, &mut rng))];
        assert!(matches!(
            verify_theta_antisymmetry(&t, &pairs, 1e-8),
            Err(Error::NotProbabilityPreserving { modulus }) if (modulus - 4.0).abs() < 1e-12
        ));
    }

    #[test]
    fn gauge_fix_of_unitary_is_identity_wrapper() {
        let u = haar_unitary(3, 17);
        let t = Transformation::linear(u.clone());
        let g = gauge_fix(&t, &GaugeConfig::default(), 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let z = StateVector::random_gaussian(3, &mut rng);
            let diff = (g.apply(&z).unwrap().into_vector() - &u * z.as_vector()).norm();
            assert!(diff < 1e-9);
        }
        assert!(g.reference_theta_max < 1e-9);
    }

    #[test]
    fn gauge_fix_removes_norm_dressing() {
        // Oracle: α(z) → −‖z‖² + const as ε → 0, so T̃ = e^{iφ0} U z.
        let u = haar_unitary(3, 23);
        let uu = u.clone();
        let t = Transformation::from_fn(3, move |z| {
            StateVector::wrap_unchecked(&uu * z.as_vector() * Complex64::from_polar(1.0, z.norm_squared()))
        });
        let g = gauge_fix(&t, &GaugeConfig::default(), 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut phase0 = None;
        for _ in 0..50 {
            let z = StateVector::random_gaussian(3, &mut rng);
            let fixed = g.apply(&z).unwrap().into_vector();
            let plain = &u * z.as_vector();
            let phase = plain.dotc(&fixed).arg();
            let p0 = *phase0.get_or_insert(phase);
            let diff = (fixed - plain * Complex64::from_polar(1.0, p0)).norm();
            assert!(diff < 1e-7, "diff {diff}");
        }
    }

    #[test]
    fn gauge_fixed_dressed_conjugation_stays_antilinear() {
        let t = Transformation::from_fn(2, |z| z.conj().scale(Complex64::from_polar(1.0, z[1].im)));
        let g = gauge_fix(&t, &GaugeConfig::default(), 3).unwrap();
        let j = crate::wirtinger::richardson_refine(g.transformation(), &StateVector::zeros(2), 1e-5, 1).unwrap();
        assert!(j.d_z_max() < 1e-6);
        assert!((j.d_zbar_max() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn gauge_fix_preconditions() {
        let shifted = Transformation::from_fn(1, |z| {
            StateVector::wrap_unchecked(z.as_vector().add_scalar(Complex64::new(1.0, 0.0)))
        });
        assert!(matches!(gauge_fix(&shifted, &GaugeConfig::default(), 1), Err(Error::OriginNotFixed { .. })));
        let cfg = GaugeConfig { probe_scale: 0.5, ..GaugeConfig::default() };
        assert!(matches!(gauge_fix(&Transformation::identity(1), &cfg, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn origin_maps_to_origin() {
        let t = dressed_by_re_z1(haar_unitary(2, 1));
        let g = gauge_fix(&t, &GaugeConfig::default(), 0).unwrap();
        assert!(g.apply(&StateVector::zeros(2)).unwrap().is_zero());
        assert_eq!(g.alpha(&StateVector::zeros(2)).unwrap(), 0.0);
    }
}
