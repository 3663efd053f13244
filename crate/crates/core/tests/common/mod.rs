#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use wigner::dsl::{parse, parse_constants, BinOp, Constants, Expr, ExprKind, Func, TransformSpec};
use wigner::StateVector;

pub type CMatrix = DMatrix<Complex64>;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn corpus_specs() -> Vec<(String, TransformSpec)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(repo_root().join("corpus/specs"))
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "tf"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let spec = parse(&std::fs::read_to_string(&p).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, spec)
        })
        .collect()
}

pub fn corpus_constants() -> Constants {
    parse_constants(&std::fs::read_to_string(repo_root().join("corpus/constants.json")).unwrap()).unwrap()
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Value of one expression together with its Wirtinger gradients
/// (∂/∂z_j, ∂/∂z̄_j), obtained by forward-mode differentiation of the tree:
/// z and z̄ are independent variables and every node applies its own
/// product, quotient or chain rule.
#[derive(Debug, Clone)]
pub struct Dual {
    pub value: Complex64,
    pub dz: Vec<Complex64>,
    pub dzbar: Vec<Complex64>,
}

impl Dual {
    fn constant(value: Complex64, n: usize) -> Dual {
        Dual { value, dz: vec![c(0.0, 0.0); n], dzbar: vec![c(0.0, 0.0); n] }
    }

    fn map(&self, value: Complex64, f: impl Fn(Complex64, Complex64) -> (Complex64, Complex64)) -> Dual {
        let (dz, dzbar) = self.dz.iter().zip(&self.dzbar).map(|(&a, &b)| f(a, b)).unzip();
        Dual { value, dz, dzbar }
    }

    /// Holomorphic function g with g(value) = `value`, g'(value) = `slope`.
    fn chain(&self, value: Complex64, slope: Complex64) -> Dual {
        self.map(value, |a, b| (slope * a, slope * b))
    }

    /// conj(f): ∂(f̄)/∂z = conj(∂f/∂z̄), ∂(f̄)/∂z̄ = conj(∂f/∂z).
    fn conj(&self) -> Dual {
        Dual {
            value: self.value.conj(),
            dz: self.dzbar.iter().map(|v| v.conj()).collect(),
            dzbar: self.dz.iter().map(|v| v.conj()).collect(),
        }
    }

    fn zip(&self, other: &Dual, value: Complex64, f: impl Fn(Complex64, Complex64) -> Complex64) -> Dual {
        Dual {
            value,
            dz: self.dz.iter().zip(&other.dz).map(|(&a, &b)| f(a, b)).collect(),
            dzbar: self.dzbar.iter().zip(&other.dzbar).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

pub fn differentiate(e: &Expr, z: &[Complex64], row: usize, constants: &Constants) -> Dual {
    let n = z.len();
    let d = |x: &Expr| differentiate(x, z, row, constants);
    let i = c(0.0, 1.0);
    match &e.kind {
        ExprKind::Literal(v) => Dual::constant(*v, n),
        ExprKind::Var(k) => {
            let mut out = Dual::constant(z[k - 1], n);
            out.dz[k - 1] = c(1.0, 0.0);
            out
        }
        ExprKind::Neg(a) => {
            let a = d(a);
            a.map(-a.value, |x, y| (-x, -y))
        }
        ExprKind::Binary(op, a, b) => {
            let (a, b) = (d(a), d(b));
            let (u, v) = (a.value, b.value);
            match op {
                BinOp::Add => a.zip(&b, u + v, |x, y| x + y),
                BinOp::Sub => a.zip(&b, u - v, |x, y| x - y),
                BinOp::Mul => a.zip(&b, u * v, |x, y| x * v + u * y),
                BinOp::Div => a.zip(&b, u / v, |x, y| (x * v - u * y) / (v * v)),
            }
        }
        ExprKind::Call(f, a) => {
            let a = d(a);
            let u = a.value;
            match f {
                Func::Conj => a.conj(),
                Func::Re => {
                    let b = a.conj();
                    a.zip(&b, c(u.re, 0.0), |x, y| (x + y) * 0.5)
                }
                Func::Im => {
                    let b = a.conj();
                    a.zip(&b, c(u.im, 0.0), |x, y| (x - y) / (2.0 * i))
                }
                Func::Abs2 => {
                    let b = a.conj();
                    let ub = u.conj();
                    a.zip(&b, c(u.norm_sqr(), 0.0), |x, y| x * ub + u * y)
                }
                Func::Exp => a.chain(u.exp(), u.exp()),
                Func::Sin => a.chain(u.sin(), u.cos()),
                Func::Cos => a.chain(u.cos(), -u.sin()),
                Func::Expi => {
                    let v = (i * u).exp();
                    a.chain(v, i * v)
                }
            }
        }
        ExprKind::Norm2 => Dual {
            value: c(z.iter().map(|v| v.norm_sqr()).sum(), 0.0),
            dz: z.iter().map(|v| v.conj()).collect(),
            dzbar: z.to_vec(),
        },
        ExprKind::Mat { name, row: explicit, conj } => {
            let m = &constants[name];
            let r = explicit.unwrap_or(row) - 1;
            let coeffs: Vec<Complex64> = (0..n).map(|j| m[(r, j)]).collect();
            let value = coeffs.iter().zip(z).map(|(a, b)| if *conj { a * b.conj() } else { a * b }).sum();
            let zero = vec![c(0.0, 0.0); n];
            if *conj {
                Dual { value, dz: zero, dzbar: coeffs }
            } else {
                Dual { value, dz: coeffs, dzbar: zero }
            }
        }
    }
}

/// Symbolic Jacobian blocks (∂T/∂z, ∂T/∂z̄) of a spec at `z`.
pub fn symbolic_jacobian(spec: &TransformSpec, z: &StateVector, constants: &Constants) -> (CMatrix, CMatrix) {
    let n = spec.dim;
    let mut dz = CMatrix::zeros(n, n);
    let mut dzbar = CMatrix::zeros(n, n);
    for (k, e) in spec.outputs.iter().enumerate() {
        let d = differentiate(e, z.as_slice(), k + 1, constants);
        for j in 0..n {
            dz[(k, j)] = d.dz[j];
            dzbar[(k, j)] = d.dzbar[j];
        }
    }
    (dz, dzbar)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.norm()))
}

/// Compiled report schema from the docs directory.
pub fn report_validator() -> jsonschema::Validator {
    let text = std::fs::read_to_string(repo_root().join("docs/report.schema.json")).unwrap();
    let schema: serde_json::Value = serde_json::from_str(&text).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

pub fn assert_valid_report(validator: &jsonschema::Validator, report: &serde_json::Value) {
    let errors: Vec<String> = validator.iter_errors(report).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "report violates schema: {errors:#?}\n{report:#}");
}

pub fn leaf(n: usize) -> BoxedStrategy<String> {
    prop_oneof![
        (1..=n).prop_map(|k| format!("z{k}")),
        (0.0..3.0f64).prop_map(|v| format!("{v}")),
        (0.0..3.0f64).prop_map(|v| format!("{v}i")),
        Just("i".to_owned()),
    ]
    .boxed()
}

/// Source text of random trees; `analytic` restricts to the conj-free,
/// division-free fragment.
pub fn expr_source(n: usize, analytic: bool) -> impl Strategy<Value = String> {
    leaf(n).prop_recursive(4, 24, 2, move |inner| {
        let mut options = vec![
            (inner.clone(), inner.clone(), prop_oneof![Just("+"), Just("-"), Just("*")])
                .prop_map(|(a, b, op)| format!("({a} {op} {b})"))
                .boxed(),
            inner.clone().prop_map(|a| format!("-{a}")).boxed(),
            (inner.clone(), prop_oneof![Just("sin"), Just("cos"), Just("exp"), Just("expi")])
                .prop_map(|(a, f)| format!("{f}(0.3 * {a})"))
                .boxed(),
        ];
        if !analytic {
            options.push(
                (inner.clone(), prop_oneof![Just("conj"), Just("re"), Just("im"), Just("abs2")])
                    .prop_map(|(a, f)| format!("{f}({a})"))
                    .boxed(),
            );
            options.push((inner.clone(), inner).prop_map(|(a, b)| format!("{a} / (2 + abs2({b}))")).boxed());
            options.push(Just("norm2()".to_owned()).boxed());
        }
        proptest::strategy::Union::new(options)
    })
}

pub fn spec_source(n: usize, analytic: bool) -> impl Strategy<Value = String> {
    proptest::collection::vec(expr_source(n, analytic), n).prop_map(move |outs| {
        let mut s = format!("dim {n};\n");
        for (k, e) in outs.iter().enumerate() {
            s.push_str(&format!("T{} = {e};\n", k + 1));
        }
        s
    })
}
