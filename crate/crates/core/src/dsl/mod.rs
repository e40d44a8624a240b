//! Expression language for user-defined conformal factors.
//!
//! Grammar: decimal literals, the variable `x`, named parameters, operators
//! `+ - * / ^` (with `^` right-associative and unary minus binding tighter
//! than `*` but looser than `^`), parentheses, and the functions
//! `sqrt exp log sin cos tan tanh abs`. Derivatives come from forward-mode
//! dual numbers, exact to rounding.

mod dual;

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::error::Error;
use crate::metric::ConformalFactor;

pub use dual::Dual;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DslError {
    #[error("syntax error at offset {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },

    #[error("unknown function `{name}` at bytes {start}..{end}")]
    UnknownFunction {
        name: String,
        start: usize,
        end: usize,
    },

    #[error("unbalanced parenthesis at offset {offset}")]
    UnbalancedParen { offset: usize },

    #[error("unbound parameter `{name}` at bytes {start}..{end}")]
    UnboundParameter {
        name: String,
        start: usize,
        end: usize,
    },

    #[error("domain error ({what}) in subexpression at bytes {start}..{end}")]
    Domain {
        what: String,
        start: usize,
        end: usize,
    },

    #[error("expression not differentiable at this point (subexpression at bytes {start}..{end})")]
    NonDifferentiable { start: usize, end: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Tanh,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Literal(f64),
    Var,
    Param(String),
    Unary(UnaryOp, Box<ExprAst>),
    Binary(BinOp, Box<ExprAst>, Box<ExprAst>),
    Call(Func, Box<ExprAst>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExprAst {
    pub kind: ExprKind,
    pub span: Span,
}

impl ExprAst {
    /// Structural equality, ignoring source spans.
    pub fn structurally_eq(&self, other: &ExprAst) -> bool {
        match (&self.kind, &other.kind) {
            (ExprKind::Literal(a), ExprKind::Literal(b)) => a == b,
            (ExprKind::Var, ExprKind::Var) => true,
            (ExprKind::Param(a), ExprKind::Param(b)) => a == b,
            (ExprKind::Unary(oa, a), ExprKind::Unary(ob, b)) => {
                oa == ob && a.structurally_eq(b)
            }
            (ExprKind::Binary(oa, la, ra), ExprKind::Binary(ob, lb, rb)) => {
                oa == ob && la.structurally_eq(lb) && ra.structurally_eq(rb)
            }
            (ExprKind::Call(fa, a), ExprKind::Call(fb, b)) => fa == fb && a.structurally_eq(b),
            _ => false,
        }
    }
}

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
struct Token {
    kind: TokenKind,
    start: usize,
    end: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, DslError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' | b'(' | b')' => {
                let kind = match c {
                    b'+' => TokenKind::Plus,
                    b'-' => TokenKind::Minus,
                    b'*' => TokenKind::Star,
                    b'/' => TokenKind::Slash,
                    b'^' => TokenKind::Caret,
                    b'(' => TokenKind::LParen,
                    _ => TokenKind::RParen,
                };
                tokens.push(Token {
                    kind,
                    start: i,
                    end: i + 1,
                });
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value = text.parse::<f64>().map_err(|_| DslError::Syntax {
                    offset: start,
                    expected: "numeric literal".into(),
                })?;
                tokens.push(Token {
                    kind: TokenKind::Num(value),
                    start,
                    end: i,
                });
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(src[start..i].to_string()),
                    start,
                    end: i,
                });
            }
            _ => {
                return Err(DslError::Syntax {
                    offset: i,
                    expected: "number, identifier, operator or parenthesis".into(),
                })
            }
        }
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        start: src.len(),
        end: src.len(),
    });
    Ok(tokens)
}

// ---------------------------------------------------------------------------
// Parser (recursive descent)
// ---------------------------------------------------------------------------

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<ExprAst, DslError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            let span = Span {
                start: lhs.span.start,
                end: rhs.span.end,
            };
            lhs = ExprAst {
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<ExprAst, DslError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Star => BinOp::Mul,
                TokenKind::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            let span = Span {
                start: lhs.span.start,
                end: rhs.span.end,
            };
            lhs = ExprAst {
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    // unary minus binds tighter than `*` but looser than `^`
    fn unary(&mut self) -> Result<ExprAst, DslError> {
        if self.peek().kind == TokenKind::Minus {
            let start = self.bump().start;
            let inner = self.unary()?;
            let span = Span {
                start,
                end: inner.span.end,
            };
            return Ok(ExprAst {
                kind: ExprKind::Unary(UnaryOp::Neg, Box::new(inner)),
                span,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprAst, DslError> {
        let base = self.atom()?;
        if self.peek().kind == TokenKind::Caret {
            self.bump();
            // right-associative; exponent may carry a unary minus
            let exponent = self.unary_or_power()?;
            let span = Span {
                start: base.span.start,
                end: exponent.span.end,
            };
            return Ok(ExprAst {
                kind: ExprKind::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)),
                span,
            });
        }
        Ok(base)
    }

    fn unary_or_power(&mut self) -> Result<ExprAst, DslError> {
        if self.peek().kind == TokenKind::Minus {
            let start = self.bump().start;
            let inner = self.unary_or_power()?;
            let span = Span {
                start,
                end: inner.span.end,
            };
            return Ok(ExprAst {
                kind: ExprKind::Unary(UnaryOp::Neg, Box::new(inner)),
                span,
            });
        }
        self.power()
    }

    fn atom(&mut self) -> Result<ExprAst, DslError> {
        let t = self.bump();
        match t.kind {
            TokenKind::Num(v) => Ok(ExprAst {
                kind: ExprKind::Literal(v),
                span: Span {
                    start: t.start,
                    end: t.end,
                },
            }),
            TokenKind::Ident(name) => {
                if self.peek().kind == TokenKind::LParen {
                    let func = Func::from_name(&name).ok_or(DslError::UnknownFunction {
                        name: name.clone(),
                        start: t.start,
                        end: t.end,
                    })?;
                    let open = self.bump();
                    let arg = self.expr()?;
                    let close = self.bump();
                    if close.kind != TokenKind::RParen {
                        return Err(DslError::UnbalancedParen { offset: open.start });
                    }
                    Ok(ExprAst {
                        kind: ExprKind::Call(func, Box::new(arg)),
                        span: Span {
                            start: t.start,
                            end: close.end,
                        },
                    })
                } else if name == "x" {
                    Ok(ExprAst {
                        kind: ExprKind::Var,
                        span: Span {
                            start: t.start,
                            end: t.end,
                        },
                    })
                } else {
                    Ok(ExprAst {
                        kind: ExprKind::Param(name),
                        span: Span {
                            start: t.start,
                            end: t.end,
                        },
                    })
                }
            }
            TokenKind::LParen => {
                let inner = self.expr()?;
                let close = self.bump();
                if close.kind != TokenKind::RParen {
                    return Err(DslError::UnbalancedParen { offset: t.start });
                }
                Ok(inner)
            }
            TokenKind::RParen => Err(DslError::UnbalancedParen { offset: t.start }),
            _ => Err(DslError::Syntax {
                offset: t.start,
                expected: "expression".into(),
            }),
        }
    }
}

/// Parses `source` into an AST.
pub fn parse_expression(source: &str) -> Result<ExprAst, DslError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser { tokens, pos: 0 };
    let ast = parser.expr()?;
    let trailing = parser.peek();
    match trailing.kind {
        TokenKind::Eof => Ok(ast),
        TokenKind::RParen => Err(DslError::UnbalancedParen {
            offset: trailing.start,
        }),
        _ => Err(DslError::Syntax {
            offset: trailing.start,
            expected: "operator or end of input".into(),
        }),
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

fn eval_dual(
    ast: &ExprAst,
    x: Dual,
    params: &HashMap<String, f64>,
    need_derivative: bool,
) -> Result<Dual, DslError> {
    let span = ast.span;
    let domain = |what: &str| DslError::Domain {
        what: what.into(),
        start: span.start,
        end: span.end,
    };
    let out = match &ast.kind {
        ExprKind::Literal(v) => Dual::constant(*v),
        ExprKind::Var => x,
        ExprKind::Param(name) => Dual::constant(*params.get(name).ok_or_else(|| {
            DslError::UnboundParameter {
                name: name.clone(),
                start: span.start,
                end: span.end,
            }
        })?),
        ExprKind::Unary(UnaryOp::Neg, inner) => -eval_dual(inner, x, params, need_derivative)?,
        ExprKind::Binary(op, lhs, rhs) => {
            let a = eval_dual(lhs, x, params, need_derivative)?;
            let b = eval_dual(rhs, x, params, need_derivative)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b.val == 0.0 {
                        return Err(domain("division by zero"));
                    }
                    a / b
                }
                BinOp::Pow => pow_dual(a, b, need_derivative, span)?,
            }
        }
        ExprKind::Call(func, arg) => {
            let a = eval_dual(arg, x, params, need_derivative)?;
            match func {
                Func::Sqrt => {
                    if a.val < 0.0 {
                        return Err(domain("sqrt of negative value"));
                    }
                    if a.val == 0.0 && need_derivative && a.der != 0.0 {
                        return Err(DslError::NonDifferentiable {
                            start: span.start,
                            end: span.end,
                        });
                    }
                    if a.val == 0.0 {
                        Dual::constant(0.0)
                    } else {
                        a.sqrt()
                    }
                }
                Func::Exp => a.exp(),
                Func::Log => {
                    if a.val <= 0.0 {
                        return Err(domain("log of non-positive value"));
                    }
                    a.ln()
                }
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Tan => a.tan(),
                Func::Tanh => a.tanh(),
                Func::Abs => {
                    if a.val == 0.0 && need_derivative && a.der != 0.0 {
                        return Err(DslError::NonDifferentiable {
                            start: span.start,
                            end: span.end,
                        });
                    }
                    a.abs()
                }
            }
        }
    };
    if !out.val.is_finite() {
        return Err(domain("non-finite result"));
    }
    if need_derivative && !out.der.is_finite() {
        return Err(DslError::NonDifferentiable {
            start: span.start,
            end: span.end,
        });
    }
    Ok(out)
}

fn pow_dual(a: Dual, b: Dual, need_derivative: bool, span: Span) -> Result<Dual, DslError> {
    let domain = |what: &str| DslError::Domain {
        what: what.into(),
        start: span.start,
        end: span.end,
    };
    if a.val > 0.0 {
        let v = a.val.powf(b.val);
        let der = v * (b.der * a.val.ln() + b.val * a.der / a.val);
        return Ok(Dual { val: v, der });
    }
    if a.val == 0.0 {
        if b.val <= 0.0 {
            return Err(domain("zero raised to a non-positive power"));
        }
        let der = if !need_derivative || a.der == 0.0 {
            0.0
        } else if b.val == 1.0 {
            a.der
        } else if b.val > 1.0 {
            0.0
        } else {
            return Err(DslError::NonDifferentiable {
                start: span.start,
                end: span.end,
            });
        };
        return Ok(Dual { val: 0.0, der });
    }
    // negative base: integer constant exponents only
    if b.der == 0.0 && b.val.fract() == 0.0 && b.val.abs() < 1e15 {
        let n = b.val as i32;
        let v = a.val.powi(n);
        let der = b.val * a.val.powi(n - 1) * a.der;
        return Ok(Dual { val: v, der });
    }
    Err(domain("negative base with non-integer exponent"))
}

/// Evaluates an AST at position `x` with the given parameter bindings.
pub fn evaluate(
    ast: &ExprAst,
    x: f64,
    params: &HashMap<String, f64>,
) -> Result<f64, DslError> {
    Ok(eval_dual(ast, Dual::constant(x), params, false)?.val)
}

/// Evaluates an AST and its derivative in `x` via dual numbers.
pub fn evaluate_with_derivative(
    ast: &ExprAst,
    x: f64,
    params: &HashMap<String, f64>,
) -> Result<(f64, f64), DslError> {
    let d = eval_dual(ast, Dual::variable(x), params, true)?;
    Ok((d.val, d.der))
}

// ---------------------------------------------------------------------------
// Pretty printer (fully parenthesized, re-parses to the same structure)
// ---------------------------------------------------------------------------

pub fn pretty(ast: &ExprAst) -> String {
    match &ast.kind {
        ExprKind::Literal(v) => format!("{v}"),
        ExprKind::Var => "x".to_string(),
        ExprKind::Param(name) => name.clone(),
        ExprKind::Unary(UnaryOp::Neg, inner) => format!("(-{})", pretty(inner)),
        ExprKind::Binary(op, lhs, rhs) => {
            let sym = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "/",
                BinOp::Pow => "^",
            };
            format!("({}{sym}{})", pretty(lhs), pretty(rhs))
        }
        ExprKind::Call(func, arg) => format!("{}({})", func.name(), pretty(arg)),
    }
}

// ---------------------------------------------------------------------------
// Compilation into a ConformalFactor
// ---------------------------------------------------------------------------

/// Number of validation samples taken over the caller-given domain.
const VALIDATION_SAMPLES: usize = 256;

/// Compiles an expression into a [`ConformalFactor`] whose derivative comes
/// from dual numbers. Singular points are declared by the caller, never
/// auto-detected. The profile is validated for positivity on 256 samples
/// over `domain`, skipping declared singular neighbourhoods.
pub fn compile_conformal_factor(
    source: &str,
    params: &HashMap<String, f64>,
    singular_points: &[f64],
    domain: (f64, f64),
) -> Result<ConformalFactor, Error> {
    let ast = Arc::new(parse_expression(source)?);
    let scale = singular_points
        .iter()
        .fold(1.0f64, |acc, p| acc.max(p.abs()));
    let exclusion_radius = 1e-9 * scale;

    let (lo, hi) = domain;
    let step = (hi - lo) / VALIDATION_SAMPLES as f64;
    for i in 0..VALIDATION_SAMPLES {
        let x = lo + (i as f64 + 0.5) * step;
        if singular_points
            .iter()
            .any(|p| (x - p).abs() <= exclusion_radius)
        {
            continue;
        }
        let v = evaluate(&ast, x, params)?;
        if v <= 0.0 {
            return Err(Error::NonPositiveOmega { x, omega: v });
        }
    }

    let params_owned: HashMap<String, f64> = params.clone();
    let ast_omega = Arc::clone(&ast);
    let params_omega = params_owned.clone();
    let ast_prime = Arc::clone(&ast);
    let params_prime = params_owned;
    Ok(ConformalFactor::new(
        move |x: f64| Ok(evaluate(&ast_omega, x, &params_omega)?),
        move |x: f64| Ok(evaluate_with_derivative(&ast_prime, x, &params_prime)?.1),
        singular_points.to_vec(),
        source.to_string(),
        exclusion_radius,
        false,
    ))
}
