//! Recursive-descent parser.
//!
//! ```text
//! spec    := "dim" INT ";" { assign }
//! assign  := "T" INT "=" expr ";"
//! expr    := term { ("+" | "-") term }
//! term    := unary { ("*" | "/") unary }
//! unary   := "-" unary | primary
//! primary := NUMBER | NUMBER "i" | "i" | "z" INT | "norm2" "(" ")"
//!          | FUNC "(" expr ")" | ("mat" | "mat_conj") "(" NAME [ "," INT ] ")"
//!          | "(" expr ")"
//! ```

use num_complex::Complex64;

use super::ast::{BinOp, Expr, ExprKind, Func, Span};
use super::lexer::{tokenize, Tok, Token};
use super::{ParseError, ParseErrorKind, TransformSpec};

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    dim: usize,
}

fn err(kind: ParseErrorKind, span: Span) -> ParseError {
    ParseError { kind, line: span.line, column: span.column }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let t = self.peek();
        err(
            ParseErrorKind::Syntax {
                expected: expected.iter().map(|s| s.to_string()).collect(),
                found: t.tok.describe(),
            },
            t.span,
        )
    }

    fn expect(&mut self, tok: Tok, label: &str) -> Result<Token, ParseError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&[label]))
        }
    }

    fn expect_integer(&mut self, label: &str) -> Result<(usize, Span), ParseError> {
        match &self.peek().tok {
            Tok::Number { text, imaginary: false, .. } if text.bytes().all(|b| b.is_ascii_digit()) => {
                let (text, span) = (text.clone(), self.peek().span);
                self.bump();
                let value = text.parse::<usize>().map_err(|_| self.unexpected(&[label]))?;
                Ok((value, span))
            }
            _ => Err(self.unexpected(&[label])),
        }
    }

    fn parse_spec(&mut self, source: &str) -> Result<TransformSpec, ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) if s == "dim" => {
                self.bump();
            }
            _ => return Err(self.unexpected(&["`dim`"])),
        }
        let (dim, dim_span) = self.expect_integer("dimension")?;
        if dim == 0 {
            return Err(err(ParseErrorKind::DimensionMismatch("dimension must be at least 1".into()), dim_span));
        }
        self.dim = dim;
        self.expect(Tok::Semi, "`;`")?;

        let mut outputs: Vec<Option<Expr>> = vec![None; dim];
        let mut count = 0;
        while self.peek().tok != Tok::Eof {
            let target = self.bump();
            let index = match &target.tok {
                Tok::Ident(s) if s.len() > 1 && s.starts_with('T') && s[1..].bytes().all(|b| b.is_ascii_digit()) => {
                    s[1..].parse::<usize>().ok()
                }
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected(&["output `T<k>`", "end of input"]));
                }
            };
            let k = match index {
                Some(k) if (1..=dim).contains(&k) => k,
                _ => {
                    return Err(err(
                        ParseErrorKind::DimensionMismatch(format!("output index out of range 1..={dim}")),
                        target.span,
                    ))
                }
            };
            if outputs[k - 1].is_some() {
                return Err(err(ParseErrorKind::DimensionMismatch(format!("output T{k} assigned twice")), target.span));
            }
            self.expect(Tok::Equals, "`=`")?;
            let e = self.parse_expr()?;
            self.expect(Tok::Semi, "`;`")?;
            outputs[k - 1] = Some(e);
            count += 1;
        }
        if count != dim {
            let eof = self.peek().span;
            return Err(err(
                ParseErrorKind::DimensionMismatch(format!("declared dimension {dim} but {count} outputs assigned")),
                eof,
            ));
        }
        Ok(TransformSpec {
            dim,
            outputs: outputs.into_iter().map(|o| o.expect("all outputs assigned")).collect(),
            source: source.to_owned(),
        })
    }

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let span = self.bump().span;
            let rhs = self.parse_term()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            let span = self.bump().span;
            let rhs = self.parse_unary()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn parse_unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Minus {
            let span = self.bump().span;
            let inner = self.parse_unary()?;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), span));
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> Result<Expr, ParseError> {
        const EXPECTED: &[&str] = &["number", "variable", "function call", "`(`", "`-`"];
        let token = self.peek().clone();
        let span = token.span;
        match token.tok {
            Tok::Number { value, imaginary, .. } => {
                self.bump();
                let c = if imaginary { Complex64::new(0.0, value) } else { Complex64::new(value, 0.0) };
                Ok(Expr::new(ExprKind::Literal(c), span))
            }
            Tok::LParen => {
                self.bump();
                let e = self.parse_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                self.parse_identifier(&name, span)
            }
            _ => Err(self.unexpected(EXPECTED)),
        }
    }

    fn parse_identifier(&mut self, name: &str, span: Span) -> Result<Expr, ParseError> {
        if name == "i" {
            return Ok(Expr::new(ExprKind::Literal(Complex64::new(0.0, 1.0)), span));
        }
        if let Some(digits) = name.strip_prefix('z') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                return match digits.parse::<usize>() {
                    Ok(k) if (1..=self.dim).contains(&k) => Ok(Expr::new(ExprKind::Var(k), span)),
                    _ => Err(err(ParseErrorKind::UnknownIdentifier(name.to_owned()), span)),
                };
            }
        }
        if name == "norm2" {
            self.expect(Tok::LParen, "`(`")?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Expr::new(ExprKind::Norm2, span));
        }
        if name == "mat" || name == "mat_conj" {
            self.expect(Tok::LParen, "`(`")?;
            let matrix = match &self.peek().tok {
                Tok::Ident(m) => m.clone(),
                _ => return Err(self.unexpected(&["matrix name"])),
            };
            self.bump();
            let row = if self.peek().tok == Tok::Comma {
                self.bump();
                let (r, rspan) = self.expect_integer("row index")?;
                if !(1..=self.dim).contains(&r) {
                    return Err(err(
                        ParseErrorKind::DimensionMismatch(format!("row index {r} out of range 1..={}", self.dim)),
                        rspan,
                    ));
                }
                Some(r)
            } else {
                None
            };
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Expr::new(ExprKind::Mat { name: matrix, row, conj: name == "mat_conj" }, span));
        }
        if let Some(func) = Func::from_name(name) {
            self.expect(Tok::LParen, "`(`")?;
            let arg = self.parse_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Expr::new(ExprKind::Call(func, Box::new(arg)), span));
        }
        Err(err(ParseErrorKind::UnknownIdentifier(name.to_owned()), span))
    }
}

pub fn parse(source: &str) -> Result<TransformSpec, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0, dim: 0 };
    p.parse_spec(source)
}
