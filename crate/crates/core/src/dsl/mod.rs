//! A small expression language for maps z ↦ T(z, z̄).
//!
//! ```text
//! # dressed conjugation on ℂ²
//! dim 2;
//! T1 = expi(im(z2)) * conj(z1);
//! T2 = expi(im(z2)) * conj(z2);
//! ```
//!
//! The full grammar is in `parser`; `docs/formats.md` at the repository root
//! documents the file formats byte by byte.

mod ast;
mod constants;
mod eval;
mod lexer;
mod parser;

use std::fmt;

pub use ast::{BinOp, Expr, ExprKind, Func, Span};
pub use constants::{parse_constants, Constants};
pub use eval::{compile_to_transformation, evaluate, evaluate_expr, DIVISION_THRESHOLD};
pub use parser::parse;

/// A parsed transformation: one expression per output component.
#[derive(Debug, Clone)]
pub struct TransformSpec {
    pub dim: usize,
    pub outputs: Vec<Expr>,
    pub source: String,
}

impl TransformSpec {
    /// Names referenced through `mat(...)` / `mat_conj(...)`, sorted and deduplicated.
    pub fn matrix_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for e in &self.outputs {
            e.walk(&mut |node| {
                if let ExprKind::Mat { name, .. } = &node.kind {
                    names.push(name.clone());
                }
            });
        }
        names.sort();
        names.dedup();
        names
    }

    /// True if some output reads z̄.
    pub fn reads_conjugate(&self) -> bool {
        self.outputs.iter().any(Expr::reads_conjugate)
    }

    /// Structural equality of the output trees, ignoring positions and source text.
    pub fn same_structure(&self, other: &TransformSpec) -> bool {
        self.dim == other.dim && self.outputs == other.outputs
    }
}

impl fmt::Display for TransformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dim {};", self.dim)?;
        for (k, e) in self.outputs.iter().enumerate() {
            writeln!(f, "T{} = {};", k + 1, e)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Syntax { expected: Vec<String>, found: String },
    UnknownIdentifier(String),
    DimensionMismatch(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
}

impl ParseError {
    pub fn code(&self) -> &'static str {
        match self.kind {
            ParseErrorKind::Syntax { .. } => "syntax_error",
            ParseErrorKind::UnknownIdentifier(_) => "unknown_identifier",
            ParseErrorKind::DimensionMismatch(_) => "dimension_mismatch",
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::Syntax { expected, found } => {
                write!(f, "syntax error: expected {}, found {found}", expected.join(" or "))
            }
            ParseErrorKind::UnknownIdentifier(name) => write!(f, "unknown identifier `{name}`"),
            ParseErrorKind::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
        }
    }
}

impl std::error::Error for ParseError {}
