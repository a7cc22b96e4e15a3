//! Expression trees for metrics, chart fields and curves.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | ident | func '(' expr ')' | '(' expr ')'
//! func   := sqrt | exp | log | ln | sin | cos
//! ident  := x1..xn | v1..vn | t | s
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus on its left,
//! so `-x1^2` is `-(x1^2)`. Which identifiers are legal depends on the
//! [`VarScope`] the text is parsed in.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::calculus::{JetError, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    /// Zero-based point coordinate.
    X(usize),
    /// Zero-based tangent component.
    V(usize),
    T,
    S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnexpectedEnd,
    BadNumber(String),
    UnknownVariable(String),
    /// Coordinate index beyond the declared dimension.
    DimMismatch { name: String, dim: usize },
    NonSmooth(String),
    UnknownFunction(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {position}: {kind}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::UnexpectedToken(t) => write!(f, "unexpected token {t:?}"),
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input"),
            ParseErrorKind::BadNumber(s) => write!(f, "malformed number {s:?}"),
            ParseErrorKind::UnknownVariable(s) => write!(f, "unknown variable {s:?}"),
            ParseErrorKind::DimMismatch { name, dim } => {
                write!(f, "variable {name:?} exceeds dimension {dim}")
            }
            ParseErrorKind::NonSmooth(s) => write!(f, "non-smooth construct {s:?} is not allowed"),
            ParseErrorKind::UnknownFunction(s) => write!(f, "unknown function {s:?}"),
        }
    }
}

/// Which variables an expression may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarScope {
    pub dim: usize,
    pub point: bool,
    pub tangent: bool,
    pub t: bool,
    pub s: bool,
}

impl VarScope {
    /// `x1..xn, v1..vn`: a Lagrangian or domain predicate.
    pub fn metric(dim: usize) -> Self {
        VarScope {
            dim,
            point: true,
            tangent: true,
            t: false,
            s: false,
        }
    }

    /// `x1..xn`: a chart vector field component.
    pub fn chart(dim: usize) -> Self {
        VarScope {
            dim,
            point: true,
            tangent: false,
            t: false,
            s: false,
        }
    }

    /// `t`: a curve or a field along a curve.
    pub fn curve() -> Self {
        VarScope {
            dim: 0,
            point: false,
            tangent: false,
            t: true,
            s: false,
        }
    }

    /// `t, s`: a two-parameter map.
    pub fn surface() -> Self {
        VarScope {
            dim: 0,
            point: false,
            tangent: false,
            t: true,
            s: true,
        }
    }
}

const NON_SMOOTH: &[&str] = &[
    "abs", "max", "min", "sign", "sgn", "floor", "ceil", "round", "step", "heaviside", "mod",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit = &text[start..i];
            let value: f64 = lit.parse().map_err(|_| ParseError {
                position: start,
                kind: ParseErrorKind::BadNumber(lit.to_string()),
            })?;
            out.push((start, Tok::Num(value)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            // Report the full character, not the byte.
            let ch = text[i..].chars().next().unwrap_or(c);
            return Err(ParseError {
                position: i,
                kind: ParseErrorKind::UnexpectedChar(ch),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    scope: VarScope,
    _text: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, kind: ParseErrorKind) -> Result<T, ParseError> {
        Err(ParseError {
            position: self.here(),
            kind,
        })
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<(), ParseError> {
        if self.eat(op) {
            return Ok(());
        }
        match self.peek() {
            None => self.err(ParseErrorKind::UnexpectedEnd),
            Some(t) => self.err(ParseErrorKind::UnexpectedToken(tok_text(t))),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let start = self.here();
        let tok = match self.toks.get(self.pos) {
            None => return self.err(ParseErrorKind::UnexpectedEnd),
            Some((_, t)) => t.clone(),
        };
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Op('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Op(c) => Err(ParseError {
                position: start,
                kind: ParseErrorKind::UnexpectedToken(c.to_string()),
            }),
            Tok::Ident(name) => {
                if self.peek() == Some(&Tok::Op('(')) {
                    let func = self.function(&name, start)?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                self.variable(&name, start).map(Expr::Var)
            }
        }
    }

    fn function(&self, name: &str, at: usize) -> Result<Func, ParseError> {
        let func = match name {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            other if NON_SMOOTH.contains(&other) => {
                return Err(ParseError {
                    position: at,
                    kind: ParseErrorKind::NonSmooth(other.to_string()),
                })
            }
            other => {
                return Err(ParseError {
                    position: at,
                    kind: ParseErrorKind::UnknownFunction(other.to_string()),
                })
            }
        };
        Ok(func)
    }

    fn variable(&self, name: &str, at: usize) -> Result<Var, ParseError> {
        let unknown = || ParseError {
            position: at,
            kind: if NON_SMOOTH.contains(&name) {
                ParseErrorKind::NonSmooth(name.to_string())
            } else {
                ParseErrorKind::UnknownVariable(name.to_string())
            },
        };
        match name {
            "t" if self.scope.t => return Ok(Var::T),
            "s" if self.scope.s => return Ok(Var::S),
            _ => {}
        }
        let (kind, digits) = name.split_at(1);
        let allowed = match kind {
            "x" => self.scope.point,
            "v" => self.scope.tangent,
            _ => false,
        };
        if !allowed || digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(unknown());
        }
        let index: usize = digits.parse().map_err(|_| unknown())?;
        if index == 0 {
            return Err(unknown());
        }
        if index > self.scope.dim {
            return Err(ParseError {
                position: at,
                kind: ParseErrorKind::DimMismatch {
                    name: name.to_string(),
                    dim: self.scope.dim,
                },
            });
        }
        Ok(if kind == "x" {
            Var::X(index - 1)
        } else {
            Var::V(index - 1)
        })
    }
}

fn tok_text(t: &Tok) -> String {
    match t {
        Tok::Num(v) => v.to_string(),
        Tok::Ident(s) => s.clone(),
        Tok::Op(c) => c.to_string(),
    }
}

/// Values bound to the variables of an expression during evaluation.
pub struct Bindings<'a, S> {
    pub x: &'a [S],
    pub v: &'a [S],
    pub t: Option<&'a S>,
    pub s: Option<&'a S>,
}

impl<'a, S: Scalar> Bindings<'a, S> {
    pub fn point(x: &'a [S]) -> Self {
        Bindings {
            x,
            v: &[],
            t: None,
            s: None,
        }
    }

    pub fn tangent(x: &'a [S], v: &'a [S]) -> Self {
        Bindings {
            x,
            v,
            t: None,
            s: None,
        }
    }

    fn proto(&self) -> &S {
        self.x
            .first()
            .or(self.v.first())
            .or(self.t)
            .or(self.s)
            .expect("evaluation needs at least one bound variable")
    }
}

impl Expr {
    pub fn parse(text: &str, scope: VarScope) -> Result<Expr, ParseError> {
        let toks = tokenize(text)?;
        let mut p = Parser {
            toks,
            pos: 0,
            end: text.len(),
            scope,
            _text: text,
        };
        let e = p.expr()?;
        if let Some(t) = p.peek() {
            let kind = ParseErrorKind::UnexpectedToken(tok_text(t));
            return p.err(kind);
        }
        Ok(e)
    }

    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    pub fn pow(self, exponent: Expr) -> Expr {
        Expr::Pow(Box::new(self), Box::new(exponent))
    }

    /// Value when the expression references no variables.
    pub fn constant_value(&self) -> Option<f64> {
        if self.has_vars() {
            return None;
        }
        self.eval(&Bindings::<f64> {
            x: &[],
            v: &[],
            t: Some(&0.0),
            s: None,
        })
        .ok()
    }

    pub fn has_vars(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(_) => true,
            Expr::Neg(a) | Expr::Call(_, a) => a.has_vars(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.has_vars() || b.has_vars(),
        }
    }

    pub fn eval<S: Scalar>(&self, b: &Bindings<'_, S>) -> Result<S, JetError> {
        Ok(match self {
            Expr::Num(c) => b.proto().konst(*c),
            Expr::Var(v) => match *v {
                Var::X(i) => b.x[i].clone(),
                Var::V(i) => b.v[i].clone(),
                Var::T => b.t.expect("t not bound").clone(),
                Var::S => b.s.expect("s not bound").clone(),
            },
            Expr::Neg(a) => -a.eval(b)?,
            Expr::Add(l, r) => l.eval(b)? + r.eval(b)?,
            Expr::Sub(l, r) => l.eval(b)? - r.eval(b)?,
            Expr::Mul(l, r) => l.eval(b)? * r.eval(b)?,
            Expr::Div(l, r) => l.eval(b)?.checked_div(&r.eval(b)?)?,
            Expr::Pow(base, exponent) => {
                let base = base.eval(b)?;
                if exponent.has_vars() {
                    let e = exponent.eval(b)?;
                    (e * base.checked_ln()?).exp()
                } else {
                    let p = exponent.eval(&Bindings::<f64> {
                        x: &[],
                        v: &[],
                        t: Some(&0.0),
                        s: None,
                    })?;
                    base.checked_powf(p)?
                }
            }
            Expr::Call(f, a) => {
                let a = a.eval(b)?;
                match f {
                    Func::Sqrt => a.checked_sqrt()?,
                    Func::Exp => a.exp(),
                    Func::Log => a.checked_ln()?,
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                }
            }
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => {
                if *v < 0.0 {
                    write!(f, "({v})")
                } else {
                    write!(f, "{v}")
                }
            }
            Expr::Var(Var::X(i)) => write!(f, "x{}", i + 1),
            Expr::Var(Var::V(i)) => write!(f, "v{}", i + 1),
            Expr::Var(Var::T) => write!(f, "t"),
            Expr::Var(Var::S) => write!(f, "s"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => {
                let name = match func {
                    Func::Sqrt => "sqrt",
                    Func::Exp => "exp",
                    Func::Log => "log",
                    Func::Sin => "sin",
                    Func::Cos => "cos",
                };
                write!(f, "{name}({a})")
            }
        }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}
