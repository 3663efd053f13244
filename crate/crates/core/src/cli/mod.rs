//! Command-line driver.
//!
//! Every subcommand produces one report (JSON by default) and an exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | verdict reached (symmetry classified, check passed, all fuzz instances correct) |
//! | 1    | usage, I/O, parse, constants, manifest or evaluation error |
//! | 2    | the input was evaluated and rejected (not a symmetry, mixed branch, not unitary, ...) |
//!
//! A report is still written for exit code 2 and for errors that happen after
//! argument parsing.

mod format;
mod fuzz;
mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::classifier::{align_global_phase, check_preservation, classify, ClassifyConfig};
use crate::dsl::{compile_to_transformation, parse, parse_constants, Constants, TransformSpec};
use crate::error::Error;
use crate::mazurulam::{reconstruct_orthogonal, MazurUlamConfig, RealTransformation};
use crate::state::StateVector;
use crate::transform::Transformation;
use crate::wirtinger::{jacobian_with_levels, MAX_RICHARDSON_LEVELS};

pub use fuzz::{parse_manifest, ManifestEntry, ManifestKind};
pub use report::SCHEMA_VERSION;

/// Tolerance on the imaginary part of outputs in `mazur-ulam`.
const REAL_OUTPUT_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "wigner", version, about = "Classify probability-preserving maps as unitary or antiunitary")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide linear/antilinear and reconstruct the operator.
    Classify(SpecArgs),
    /// Only test probability preservation.
    Check(SpecArgs),
    /// Run a manifest of generated instances through the classifier.
    Fuzz(FuzzArgs),
    /// Dump the Wirtinger Jacobian at a point.
    Diff(DiffArgs),
    /// Reconstruct an orthogonal matrix from a real scalar-product-preserving map.
    MazurUlam(SpecArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Finite-difference step.
    #[arg(long, value_name = "F")]
    pub step: Option<f64>,
    /// Tolerance on | |<Tw|Tz>| - |<w|z>| | (also the Mazur-Ulam tolerance).
    #[arg(long, value_name = "F")]
    pub tol_preserve: Option<f64>,
    /// Tolerance on unitarity and reconstruction residuals.
    #[arg(long, value_name = "F")]
    pub tol_unitary: Option<f64>,
    /// Threshold below which a Jacobian block counts as vanishing.
    #[arg(long, value_name = "F")]
    pub tol_branch: Option<f64>,
    /// Random pairs / points per check.
    #[arg(long, value_name = "N")]
    pub samples: Option<usize>,
    /// Seed for every random choice.
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Omit `timing_ms` so reports are byte-reproducible.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    /// Transformation in the expression language.
    #[arg(long, value_name = "PATH")]
    pub spec: PathBuf,
    /// JSON object of named matrices for `mat(...)`.
    #[arg(long, value_name = "PATH")]
    pub constants: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DiffArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Evaluation point as a JSON array of [re, im] pairs; origin if omitted.
    #[arg(long, value_name = "JSON")]
    pub point: Option<String>,
    /// Richardson extrapolation levels (0 = plain central differences).
    #[arg(long, default_value_t = 1)]
    pub levels: u32,
}

#[derive(Debug, Clone, Args)]
pub struct FuzzArgs {
    /// JSON array of {kind, n, seed, dressing_degree} entries.
    #[arg(long, value_name = "PATH")]
    pub manifest: PathBuf,
    /// Worker threads (0 = one per core).
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Errors of the driver itself, on top of library errors.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io_error",
            CliError::Manifest(_) => "manifest_schema_error",
            CliError::Core(e) => e.code(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Manifest(_) => 1,
            CliError::Core(e) => e.exit_code(),
        }
    }
}

/// A finished command: the report and the process exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub exit_code: i32,
}

/// Parses `args` (program name first), runs the command and writes the report.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let common = match &cli.command {
        Command::Classify(a) | Command::Check(a) | Command::MazurUlam(a) => a.common.clone(),
        Command::Diff(a) => a.spec.common.clone(),
        Command::Fuzz(a) => a.common.clone(),
    };
    let outcome = execute(&cli.command);
    match emit(&outcome.report, &cli.command, &common) {
        Ok(()) => outcome.exit_code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Runs a parsed command without writing anything.
pub fn execute(command: &Command) -> Outcome {
    let start = Instant::now();
    let (name, common) = match command {
        Command::Classify(a) => ("classify", &a.common),
        Command::Check(a) => ("check", &a.common),
        Command::MazurUlam(a) => ("mazur-ulam", &a.common),
        Command::Diff(a) => ("diff", &a.spec.common),
        Command::Fuzz(a) => ("fuzz", &a.common),
    };
    let echo = config_echo(command);
    let result = match command {
        Command::Classify(a) => cmd_classify(a),
        Command::Check(a) => cmd_check(a),
        Command::MazurUlam(a) => cmd_mazur_ulam(a),
        Command::Diff(a) => cmd_diff(a),
        Command::Fuzz(a) => cmd_fuzz(a),
    };
    let (mut body, exit_code) = match result {
        Ok(done) => done,
        Err(failure) => (report::error_body(&failure.error, failure.details), failure.error.exit_code()),
    };
    body.insert("schema_version".into(), json!(SCHEMA_VERSION));
    body.insert("command".into(), json!(name));
    body.insert("config_echo".into(), echo);
    if !common.no_timestamp {
        body.insert("timing_ms".into(), json!(start.elapsed().as_secs_f64() * 1e3));
    }
    Outcome { report: Value::Object(body), exit_code }
}

/// An error plus whatever diagnostic fields were measured before it.
struct Failure {
    error: CliError,
    details: Map<String, Value>,
}

impl<E: Into<CliError>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { error: e.into(), details: Map::new() }
    }
}

type CmdResult = Result<(Map<String, Value>, i32), Failure>;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn load(args: &SpecArgs) -> Result<(TransformSpec, Constants), CliError> {
    let spec = parse(&read(&args.spec)?).map_err(Error::from)?;
    let constants = match &args.constants {
        Some(p) => parse_constants(&read(p)?)?,
        None => Constants::new(),
    };
    Ok((spec, constants))
}

fn positive(name: &str, v: Option<f64>, default: f64) -> Result<f64, CliError> {
    match v {
        None => Ok(default),
        Some(x) if x > 0.0 && x.is_finite() => Ok(x),
        Some(x) => Err(Error::InvalidArgument(format!("--{name} must be positive, got {x}")).into()),
    }
}

fn classify_config(c: &CommonArgs) -> Result<ClassifyConfig, CliError> {
    let d = ClassifyConfig::default();
    let samples = c.samples.unwrap_or(d.samples);
    if samples == 0 {
        return Err(Error::InvalidArgument("--samples must be at least 1".into()).into());
    }
    Ok(ClassifyConfig {
        step: positive("step", c.step, d.step)?,
        tol_preserve: positive("tol-preserve", c.tol_preserve, d.tol_preserve)?,
        tol_unitary: positive("tol-unitary", c.tol_unitary, d.tol_unitary)?,
        tol_branch: positive("tol-branch", c.tol_branch, d.tol_branch)?,
        samples,
        seed: c.seed,
        ..d
    })
}

fn config_echo(command: &Command) -> Value {
    let d = ClassifyConfig::default();
    let (common, mut echo) = match command {
        Command::Classify(a) | Command::Check(a) | Command::MazurUlam(a) => (&a.common, spec_echo(a)),
        Command::Diff(a) => {
            let mut m = spec_echo(&a.spec);
            m.insert("point".into(), a.point.as_deref().map_or(Value::Null, |p| json!(p)));
            m.insert("levels".into(), json!(a.levels));
            (&a.spec.common, m)
        }
        Command::Fuzz(a) => {
            let mut m = Map::new();
            m.insert("manifest".into(), json!(a.manifest.display().to_string()));
            (&a.common, m)
        }
    };
    let mu = MazurUlamConfig::default();
    let tol_preserve_default = if matches!(command, Command::MazurUlam(_)) { mu.tol } else { d.tol_preserve };
    echo.insert("step".into(), json!(common.step.unwrap_or(d.step)));
    echo.insert("tol_preserve".into(), json!(common.tol_preserve.unwrap_or(tol_preserve_default)));
    echo.insert("tol_unitary".into(), json!(common.tol_unitary.unwrap_or(d.tol_unitary)));
    echo.insert("tol_branch".into(), json!(common.tol_branch.unwrap_or(d.tol_branch)));
    echo.insert("samples".into(), json!(common.samples.unwrap_or(d.samples)));
    echo.insert("seed".into(), json!(common.seed));
    Value::Object(echo)
}

fn spec_echo(a: &SpecArgs) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("spec".into(), json!(a.spec.display().to_string()));
    m.insert("constants".into(), a.constants.as_ref().map_or(Value::Null, |p| json!(p.display().to_string())));
    m
}

fn cmd_classify(args: &SpecArgs) -> CmdResult {
    let config = classify_config(&args.common)?;
    let (spec, constants) = load(args)?;
    let t = compile_to_transformation(&spec, &constants)?;
    match classify(&t, &config) {
        Ok(result) => {
            let mut body = report::classification_body(&result, &config);
            let alignments: Vec<Value> = spec
                .matrix_names()
                .into_iter()
                .filter_map(|name| {
                    let a = align_global_phase(&result.operator, &constants[&name]).ok()?;
                    Some(json!({ "matrix": name, "phase": a.phase, "aligned_residual": a.aligned_residual }))
                })
                .collect();
            if !alignments.is_empty() {
                body.insert("reference_alignment".into(), Value::Array(alignments));
            }
            Ok((body, 0))
        }
        Err(error) => {
            let mut details = Map::new();
            let preservation = match &error {
                Error::NotASymmetry(p) => Some((**p).clone()),
                e if e.exit_code() == 2 => {
                    check_preservation(&t, config.samples, config.seed, config.tol_preserve).ok()
                }
                _ => None,
            };
            if let Some(p) = preservation {
                details.insert("preservation".into(), report::preservation(&p));
            }
            Err(Failure { error: error.into(), details })
        }
    }
}

fn cmd_check(args: &SpecArgs) -> CmdResult {
    let config = classify_config(&args.common)?;
    let (spec, constants) = load(args)?;
    let t = compile_to_transformation(&spec, &constants)?;
    let p = check_preservation(&t, config.samples, config.seed, config.tol_preserve)?;
    if p.pass {
        let mut body = Map::new();
        body.insert("verdict".into(), json!("probability_preserving"));
        body.insert("preservation".into(), report::preservation(&p));
        Ok((body, 0))
    } else {
        let mut details = Map::new();
        details.insert("preservation".into(), report::preservation(&p));
        Err(Failure { error: Error::NotASymmetry(Box::new(p)).into(), details })
    }
}

fn parse_point(text: &str, n: usize) -> Result<StateVector, CliError> {
    let pairs: Vec<[f64; 2]> = serde_json::from_str(text)
        .map_err(|e| Error::InvalidArgument(format!("--point must be a JSON array of [re, im] pairs: {e}")))?;
    if pairs.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: pairs.len() }.into());
    }
    Ok(StateVector::new(pairs.iter().map(|&[re, im]| Complex64::new(re, im)).collect())?)
}

fn cmd_diff(args: &DiffArgs) -> CmdResult {
    let config = classify_config(&args.spec.common)?;
    if args.levels > MAX_RICHARDSON_LEVELS {
        return Err(Error::InvalidArgument(format!("--levels must be at most {MAX_RICHARDSON_LEVELS}")).into());
    }
    let (spec, constants) = load(&args.spec)?;
    let t: Transformation = compile_to_transformation(&spec, &constants)?;
    let at = match &args.point {
        Some(p) => parse_point(p, spec.dim)?,
        None => StateVector::zeros(spec.dim),
    };
    let j = jacobian_with_levels(&t, &at, config.step, args.levels)?;
    let d_zbar_max = j.d_zbar_max();
    let mut body = Map::new();
    let analytic = d_zbar_max < config.tol_branch;
    body.insert("verdict".into(), json!(if analytic { "analytic" } else { "not_analytic" }));
    body.insert("point".into(), report::complex_vector(at.as_slice()));
    body.insert("d_z".into(), report::complex_matrix(&j.d_z));
    body.insert("d_zbar".into(), report::complex_matrix(&j.d_zbar));
    body.insert("d_z_max".into(), json!(j.d_z_max()));
    body.insert("d_zbar_max".into(), json!(d_zbar_max));
    body.insert("step".into(), json!(j.step));
    body.insert("levels".into(), json!(j.levels));
    body.insert("analytic".into(), json!(analytic));
    body.insert("analyticity_tolerance".into(), json!(config.tol_branch));
    Ok((body, 0))
}

fn real_map(t: Transformation) -> RealTransformation {
    let n = t.dim();
    RealTransformation::new(n, move |x: &DVector<f64>| {
        let z = StateVector::new(x.iter().map(|&v| Complex64::new(v, 0.0)).collect())?;
        let out = t.apply(&z)?;
        for c in out.as_slice() {
            if c.im.abs() > REAL_OUTPUT_TOL * c.re.abs().max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "mazur-ulam needs real outputs on real inputs, got imaginary part {:e}",
                    c.im
                )));
            }
        }
        Ok(DVector::from_iterator(n, out.as_slice().iter().map(|c| c.re)))
    })
}

fn cmd_mazur_ulam(args: &SpecArgs) -> CmdResult {
    let c = &args.common;
    let d = MazurUlamConfig::default();
    let samples = c.samples.unwrap_or(d.samples);
    if samples == 0 {
        return Err(Error::InvalidArgument("--samples must be at least 1".into()).into());
    }
    let config = MazurUlamConfig {
        step: positive("step", c.step, d.step)?,
        tol: positive("tol-preserve", c.tol_preserve, d.tol)?,
        samples,
        seed: c.seed,
    };
    let (spec, constants) = load(args)?;
    let t = real_map(compile_to_transformation(&spec, &constants)?);
    let rec = reconstruct_orthogonal(&t, &config)?;
    let mut body = Map::new();
    body.insert("verdict".into(), json!("orthogonal"));
    body.insert("matrix".into(), report::real_matrix(&rec.matrix));
    body.insert("orthogonality_residual".into(), json!(rec.orthogonality_residual));
    body.insert("reconstruction_residual".into(), json!(rec.reconstruction_residual));
    body.insert("constancy_residual".into(), json!(rec.constancy_residual));
    body.insert(
        "isometry".into(),
        json!({
            "pairs_tested": rec.isometry.pairs_tested,
            "max_deviation": rec.isometry.max_deviation,
            "tolerance": rec.isometry.tolerance,
            "pass": rec.isometry.pass,
        }),
    );
    Ok((body, 0))
}

fn cmd_fuzz(args: &FuzzArgs) -> CmdResult {
    let config = classify_config(&args.common)?;
    let entries = parse_manifest(&read(&args.manifest)?)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("--jobs: {e}")))?;
    let results = pool.install(|| fuzz::run_manifest(&entries, &config));
    let (body, all_correct) = fuzz::fuzz_body(&results);
    Ok((body, if all_correct { 0 } else { 2 }))
}

/// Renders `report` in the requested format to the output path or stdout.
fn emit(report: &Value, command: &Command, common: &CommonArgs) -> Result<(), CliError> {
    let text = match common.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports are valid JSON");
            s.push('\n');
            s
        }
        Format::Csv => format::csv(report, matches!(command, Command::Fuzz(_)))?,
        Format::Human => format::human(report),
    };
    match &common.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io { path: "<stdout>".into(), message: e.to_string() })
        }
    }
}

/// Parses and executes without writing; used by tests to inspect reports.
pub fn outcome_from<I, T>(args: I) -> Result<Outcome, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Ok(execute(&Cli::try_parse_from(args)?.command))
}
