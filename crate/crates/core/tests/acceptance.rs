//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines are always printed; exits non-zero if any fails.

mod common;

use std::process::Command;
use std::time::Instant;

use common::*;
use nalgebra::DMatrix;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use wigner::classifier::align_global_phase;
use wigner::dsl::{compile_to_transformation, parse};
use wigner::generators::{make_adversary, random_symmetry, AdversaryKind, GroundTruth, SymmetryKind};
use wigner::mazurulam::random_orthogonal;
use wigner::wirtinger::{analyticity_test, real_jacobian, wirtinger_jacobian};
use wigner::{
    classify, reconstruct_orthogonal, verify_theta_antisymmetry, ClassificationResult, ClassifyConfig, Error,
    MazurUlamConfig, RealTransformation, StateVector,
};

const INSTANCES: usize = 200;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Instance i of the round-trip corpus: dims 2–16, dressing degree 0–3.
fn corpus_params(i: usize) -> (usize, u32, u64) {
    (2 + i % 15, (i % 4) as u32, i as u64)
}

struct RoundTrip {
    kind: SymmetryKind,
    params: (usize, u32, u64),
    result: Result<ClassificationResult, Error>,
    residual: f64,
}

fn run_corpus(kind: SymmetryKind) -> (Vec<RoundTrip>, f64) {
    let start = Instant::now();
    let runs = (0..INSTANCES)
        .map(|i| {
            let params = corpus_params(i);
            let g = random_symmetry(kind, params.0, params.1, params.2).unwrap();
            let result = classify(&g.transformation, &ClassifyConfig::default());
            let residual = match (&result, &g.truth) {
                (Ok(r), GroundTruth::Symmetry { matrix, .. }) => {
                    align_global_phase(&r.operator, matrix).map(|a| a.aligned_residual).unwrap_or(f64::INFINITY)
                }
                _ => f64::INFINITY,
            };
            RoundTrip { kind, params, result, residual }
        })
        .collect();
    (runs, start.elapsed().as_secs_f64())
}

fn round_trip(runs: &[RoundTrip], seconds: f64) -> Outcome {
    let mut worst: f64 = 0.0;
    for r in runs {
        match &r.result {
            Ok(c) => ensure(c.branch == r.kind, || format!("{:?}: branch {:?}", r.params, c.branch))?,
            Err(e) => return Err(format!("{:?}: {e}", r.params)),
        }
        ensure(r.residual < 1e-6, || format!("{:?}: residual {:e}", r.params, r.residual))?;
        worst = worst.max(r.residual);
    }
    ensure(seconds < 30.0, || format!("took {seconds:.1} s"))?;
    Ok(format!("{} instances, max residual {worst:.2e}, {seconds:.1} s", runs.len()))
}

fn dichotomy(all: &[&RoundTrip]) -> Outcome {
    let (mut small, mut large): (f64, f64) = (0.0, f64::INFINITY);
    for r in all {
        let c = match &r.result {
            Ok(c) => c,
            Err(Error::MixedBranch { .. }) => return Err(format!("{:?} {:?}: mixed branch", r.kind, r.params)),
            Err(e) => return Err(format!("{:?} {:?}: {e}", r.kind, r.params)),
        };
        let (lo, hi) = if c.d_z_max < c.d_zbar_max { (c.d_z_max, c.d_zbar_max) } else { (c.d_zbar_max, c.d_z_max) };
        ensure(lo < 1e-4 && hi > 0.5, || format!("{:?} {:?}: blocks {lo:e} / {hi}", r.kind, r.params))?;
        small = small.max(lo);
        large = large.min(hi);
    }
    Ok(format!("{} instances, vanishing block ≤ {small:.2e}, other block ≥ {large:.3}", all.len()))
}

fn unitarity(all: &[&RoundTrip]) -> Outcome {
    let mut worst: f64 = 0.0;
    for r in all {
        if let Ok(c) = &r.result {
            ensure(c.unitarity_residual < 1e-6, || format!("{:?}: {:e}", r.params, c.unitarity_residual))?;
            worst = worst.max(c.unitarity_residual);
        }
    }
    Ok(format!("max ‖M*M − I‖ = {worst:.2e}"))
}

fn theta_antisymmetry() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut instances = 0;
    for kind in [SymmetryKind::Linear, SymmetryKind::Antilinear] {
        for i in (0..INSTANCES).filter(|i| corpus_params(*i).1 > 0) {
            let (n, degree, seed) = corpus_params(i);
            let t = random_symmetry(kind, n, degree, seed).unwrap().transformation;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa5a5);
            let pairs: Vec<_> = (0..100)
                .map(|_| (StateVector::random_gaussian(n, &mut rng), StateVector::random_gaussian(n, &mut rng)))
                .collect();
            let report = verify_theta_antisymmetry(&t, &pairs, 1e-7).map_err(|e| e.to_string())?;
            ensure(report.pass, || format!("{kind:?} {:?}: {:e}", (n, degree, seed), report.max_deviation))?;
            worst = worst.max(report.max_deviation);
            instances += 1;
        }
    }
    Ok(format!("{instances} dressed instances × 100 pairs, max |θ(w,z) + θ(z,w)| = {worst:.2e}"))
}

fn adversaries() -> Outcome {
    let mut count = 0;
    for kind in AdversaryKind::ALL {
        for seed in 0..10u64 {
            let n = 2 + (seed as usize % 5);
            let g = make_adversary(kind, n, seed).unwrap();
            match classify(&g.transformation, &ClassifyConfig::default()) {
                Err(Error::NotASymmetry(_)) | Err(Error::NotUnitary { .. }) => count += 1,
                Err(e) => return Err(format!("{kind:?} seed {seed}: unexpected error {e}")),
                Ok(r) => return Err(format!("{kind:?} seed {seed}: accepted as {:?}", r.branch)),
            }
        }
    }
    Ok(format!("{count}/40 rejected"))
}

fn wirtinger_accuracy() -> Outcome {
    let constants = corpus_constants();
    let specs = corpus_specs();
    ensure(specs.len() >= 20, || format!("corpus has {} specs", specs.len()))?;
    let mut worst: f64 = 0.0;
    for (name, spec) in &specs {
        let t = compile_to_transformation(spec, &constants).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..5 {
            let z = StateVector::random_gaussian(spec.dim, &mut rng);
            let j = wirtinger_jacobian(&t, &z, 1e-5).map_err(|e| e.to_string())?;
            let (dz, dzbar) = symbolic_jacobian(spec, &z, &constants);
            let err = max_abs(&(&j.d_z - &dz)).max(max_abs(&(&j.d_zbar - &dzbar)));
            ensure(err < 1e-6, || format!("{name}: {err:e}"))?;
            worst = worst.max(err);
        }
    }
    let mut min_ratio = f64::INFINITY;
    for (name, spec) in specs.iter().filter(|(n, _)| n.starts_with("poly_") || n == "norm_warp") {
        let t = compile_to_transformation(spec, &constants).unwrap();
        let z = StateVector::random_gaussian(spec.dim, &mut ChaCha8Rng::seed_from_u64(3));
        let (dz, dzbar) = symbolic_jacobian(spec, &z, &constants);
        let err = |h: f64| {
            let j = wirtinger_jacobian(&t, &z, h).unwrap();
            max_abs(&(&j.d_z - &dz)).max(max_abs(&(&j.d_zbar - &dzbar)))
        };
        for h in [1e-2, 4e-3, 1e-3] {
            let ratio = err(h) / err(h / 2.0);
            ensure(ratio >= 3.5, || format!("{name} at h = {h}: halving ratio {ratio:.2}"))?;
            min_ratio = min_ratio.min(ratio);
        }
    }
    Ok(format!("{} specs × 5 points, max error {worst:.2e}; min halving ratio {min_ratio:.2}", specs.len()))
}

fn mazur_ulam() -> Outcome {
    let config = MazurUlamConfig::default();
    let mut worst: f64 = 0.0;
    let mut worst_jacobian: f64 = 0.0;
    for i in 0..50u64 {
        let n = 2 + (i as usize % 9);
        let q = random_orthogonal(n, i);
        let t = RealTransformation::linear(q.clone());
        let r = reconstruct_orthogonal(&t, &config).map_err(|e| format!("n = {n}, seed {i}: {e}"))?;
        let err = (&r.matrix - &q).amax();
        ensure(err < 1e-8, || format!("n = {n}, seed {i}: {err:e}"))?;
        worst = worst.max(err);
        let mut rng = ChaCha8Rng::seed_from_u64(i ^ 0x55);
        let jacobians = (0..3)
            .map(|_| {
                let p = nalgebra::DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
                real_jacobian(|x| t.apply(x), &p, config.step).unwrap()
            })
            .collect::<Vec<DMatrix<f64>>>();
        for a in &jacobians {
            for b in &jacobians {
                worst_jacobian = worst_jacobian.max((a - b).amax());
            }
        }
        ensure(worst_jacobian < 1e-8, || format!("n = {n}, seed {i}: Jacobians differ by {worst_jacobian:e}"))?;

        let a = q.column(0).clone_owned();
        let translated = RealTransformation::from_fn(n, move |x| &q * x + &a);
        let scaled = RealTransformation::linear(r.matrix.clone() * 1.01);
        let m = r.matrix.clone();
        let bent = RealTransformation::from_fn(n, move |x| &m * x.map(|v| v + 0.05 * v * v * v));
        for (label, bad) in [("translation", translated), ("scaling", scaled), ("cubic", bent)] {
            match reconstruct_orthogonal(&bad, &config) {
                Err(Error::NotIsometry { .. }) => {}
                other => return Err(format!("{label} n = {n}, seed {i}: {other:?}")),
            }
        }
    }
    Ok(format!("50 matrices, max error {worst:.2e}, Jacobian spread {worst_jacobian:.2e}, 150 non-isometries rejected"))
}

fn analyticity() -> Outcome {
    let mut runner = TestRunner::deterministic();
    let mut checked = (0, 0);
    for k in 0..100 {
        let n = 1 + k % 3;
        let src = spec_source(n, true).new_tree(&mut runner).unwrap().current();
        let spec = parse(&src).unwrap();
        let t = compile_to_transformation(&spec, &Default::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
        let points: Vec<_> = (0..20).map(|_| StateVector::random_gaussian(n, &mut rng)).collect();
        let report = analyticity_test(&t, &points, 1e-6, 1e-5).map_err(|e| e.to_string())?;
        ensure(report.analytic, || format!("conj-free tree judged non-analytic:\n{src}"))?;
        checked.0 += 1;

        // The same outputs plus a term that reads z̄.
        let wrapper = ["conj(z1)", "re(z1)", "im(z1)", "abs2(z1)", "norm2()"][k % 5];
        let extended = src.replacen("T1 = ", &format!("T1 = {wrapper} + "), 1);
        let spec = parse(&extended).unwrap();
        let t = compile_to_transformation(&spec, &Default::default()).unwrap();
        let report = analyticity_test(&t, &points, 1e-6, 1e-5).map_err(|e| e.to_string())?;
        ensure(report.points.iter().all(|p| !p.analytic), || format!("z̄-dependent spec passed somewhere:\n{extended}"))?;
        checked.1 += 1;
    }
    let constants = corpus_constants();
    for (name, spec) in corpus_specs() {
        let t = compile_to_transformation(&spec, &constants).unwrap();
        let points: Vec<_> = {
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            (0..20).map(|_| StateVector::random_gaussian(spec.dim, &mut rng)).collect()
        };
        let report = analyticity_test(&t, &points, 1e-6, 1e-5).unwrap();
        let expected = !spec.reads_conjugate();
        ensure(report.analytic == expected, || format!("{name}: analytic = {}", report.analytic))?;
        if !expected {
            ensure(report.points.iter().all(|p| !p.analytic), || format!("{name}: passes at some point"))?;
        }
    }
    Ok(format!("{} conj-free trees analytic, {} z̄-reading trees rejected at every point, corpus agrees", checked.0, checked.1))
}

fn cli_determinism() -> Outcome {
    let cases: [&[&str]; 5] = [
        &["classify", "--spec", "corpus/specs/dressed_antiunitary.tf", "--constants", "corpus/constants.json", "--seed", "11"],
        &["check", "--spec", "corpus/specs/norm_warp.tf", "--seed", "2"],
        &["diff", "--spec", "corpus/specs/exp_chain.tf", "--point", "[[0.5, 0.25], [-1, 2], [0, -0.75]]"],
        &["mazur-ulam", "--spec", "corpus/specs/reflection_real.tf", "--seed", "4"],
        &["fuzz", "--manifest", "corpus/manifest.json", "--seed", "9", "--jobs", "4"],
    ];
    for args in cases {
        let run = || {
            let out = Command::new(env!("CARGO_BIN_EXE_wigner"))
                .args(args)
                .arg("--no-timestamp")
                .current_dir(repo_root())
                .output()
                .unwrap();
            (out.status.code(), out.stdout)
        };
        let (a, b) = (run(), run());
        ensure(a == b, || format!("{} differs between runs", args[0]))?;
        ensure(a.0 != Some(1), || format!("{} failed: {}", args[0], String::from_utf8_lossy(&a.1)))?;
    }
    Ok(format!("{} commands byte-identical across runs", cases.len()))
}

fn main() {
    // libtest flags such as --nocapture or filters are accepted and ignored.
    let (linear, linear_secs) = run_corpus(SymmetryKind::Linear);
    let (antilinear, antilinear_secs) = run_corpus(SymmetryKind::Antilinear);
    let both: Vec<&RoundTrip> = linear.iter().chain(&antilinear).collect();

    let criteria: Vec<(&str, Outcome)> = vec![
        ("linear round-trip", round_trip(&linear, linear_secs)),
        ("antilinear round-trip", round_trip(&antilinear, antilinear_secs)),
        ("branch dichotomy", dichotomy(&both)),
        ("unitarity", unitarity(&both)),
        ("theta antisymmetry", theta_antisymmetry()),
        ("adversary rejection", adversaries()),
        ("wirtinger accuracy", wirtinger_accuracy()),
        ("mazur-ulam", mazur_ulam()),
        ("analyticity criterion", analyticity()),
        ("cli determinism", cli_determinism()),
    ];
    let mut failed = 0;
    for (name, outcome) in &criteria {
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
