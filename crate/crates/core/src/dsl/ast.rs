use std::fmt;

use num_complex::Complex64;

/// 1-based line and column of the first character of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

/// Single-argument built-in functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Conj,
    Re,
    Im,
    /// |x|²
    Abs2,
    Exp,
    Sin,
    Cos,
    /// e^{i·x}
    Expi,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Conj => "conj",
            Func::Re => "re",
            Func::Im => "im",
            Func::Abs2 => "abs2",
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Expi => "expi",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "conj" => Func::Conj,
            "re" => Func::Re,
            "im" => Func::Im,
            "abs2" => Func::Abs2,
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "expi" => Func::Expi,
            _ => return None,
        })
    }

    /// Functions whose value depends on z̄ as well as z.
    pub fn is_conjugating(self) -> bool {
        matches!(self, Func::Conj | Func::Re | Func::Im | Func::Abs2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Literal(Complex64),
    /// z_k, 1-based.
    Var(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    /// ‖z‖²
    Norm2,
    /// Row `row` (1-based; defaults to the output index) of a named matrix
    /// applied to z, or to z̄ when `conj` is set.
    Mat { name: String, row: Option<usize>, conj: bool },
}

/// An expression node with its source position.
///
/// Equality compares structure only and ignores positions.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    /// Visits every node in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Neg(e) | ExprKind::Call(_, e) => e.walk(f),
            ExprKind::Binary(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            ExprKind::Literal(_) | ExprKind::Var(_) | ExprKind::Norm2 | ExprKind::Mat { .. } => {}
        }
    }

    /// True if any node reads z̄: conj, re, im, abs2, norm2 or a conjugated
    /// matrix row. Trees without such nodes are analytic in z.
    pub fn reads_conjugate(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            found |= match &e.kind {
                ExprKind::Call(f, _) => f.is_conjugating(),
                ExprKind::Norm2 => true,
                ExprKind::Mat { conj, .. } => *conj,
                _ => false,
            }
        });
        found
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    // Debug formatting of f64 round-trips exactly.
    write!(f, "{v:?}")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Literal(c) => {
                if c.im == 0.0 {
                    write_number(f, c.re)
                } else if c.re == 0.0 {
                    write_number(f, c.im)?;
                    f.write_str("i")
                } else {
                    f.write_str("(")?;
                    write_number(f, c.re)?;
                    f.write_str(" + ")?;
                    write_number(f, c.im)?;
                    f.write_str("i)")
                }
            }
            ExprKind::Var(k) => write!(f, "z{k}"),
            ExprKind::Neg(e) => write!(f, "-{e}"),
            ExprKind::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            ExprKind::Call(func, e) => write!(f, "{}({e})", func.name()),
            ExprKind::Norm2 => f.write_str("norm2()"),
            ExprKind::Mat { name, row, conj } => {
                let func = if *conj { "mat_conj" } else { "mat" };
                match row {
                    Some(r) => write!(f, "{func}({name}, {r})"),
                    None => write!(f, "{func}({name})"),
                }
            }
        }
    }
}
