//! A small expression language for the perturbation `h(x)`.
//!
//! Grammar (`^` binds tighter than unary minus, which binds tighter than
//! `*` and `/`; binary operators are left associative except `^`):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' exponent)?
//! exponent:= '-' exponent | primary ('^' exponent)?     (must fold to a rational constant)
//! primary := number | 'x' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//! func    := exp | log | sqrt | cosh | sinh
//! ```
//!
//! Numbers are decimal literals (`2`, `0.5`, `1e-3`) and are held exactly.

use std::fmt;

use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use thiserror::Error;

use crate::precision::{parse_rational, pi, BigReal, Precision};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DslError {
    #[error("syntax error at offset {offset}: expected {}", expected.join(" or "))]
    Syntax { offset: usize, expected: Vec<String> },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("`{func}` at offset {offset} takes 1 argument, got {got}")]
    Arity { func: String, offset: usize, got: usize },

    #[error("exponent at offset {offset} must be a rational constant")]
    NonConstantExponent { offset: usize },

    #[error("evaluation failed at x = {x}: {detail}")]
    Evaluation { x: String, detail: String },

    #[error("h is not strictly positive: h({x}) = {value}")]
    NotPositive { x: String, value: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Cosh,
    Sinh,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "cosh" => Func::Cosh,
            "sinh" => Func::Sinh,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Cosh => "cosh",
            Func::Sinh => "sinh",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NamedConst {
    Pi,
    E,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Const(Rational),
    Named(NamedConst),
    X,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Rational),
    Call(Func, Box<Expr>),
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn num(v: impl Into<Rational>) -> Expr {
        Expr::Const(v.into())
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, e: impl Into<Rational>) -> Expr {
        Expr::Pow(Box::new(a), e.into())
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    /// Evaluates at `x`, working at `x`'s precision.
    pub fn eval(&self, x: &BigReal) -> Result<BigReal, String> {
        let bits = x.prec();
        let v = match self {
            Expr::Const(r) => Float::with_val(bits, r),
            Expr::Named(NamedConst::Pi) => pi(bits),
            Expr::Named(NamedConst::E) => Float::with_val(bits, 1).exp(),
            Expr::X => x.clone(),
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let d = b.eval(x)?;
                if d.is_zero() {
                    return Err("division by zero".into());
                }
                a.eval(x)? / d
            }
            Expr::Pow(a, e) => {
                let base = a.eval(x)?;
                if *e.denom() == 1 {
                    let k = e.numer().to_i32().ok_or("exponent too large")?;
                    if k < 0 && base.is_zero() {
                        return Err("zero to a negative power".into());
                    }
                    base.pow(k)
                } else {
                    if base <= 0 {
                        return Err("non-integer power of a non-positive base".into());
                    }
                    base.pow(Float::with_val(bits, e))
                }
            }
            Expr::Call(f, a) => {
                let v = a.eval(x)?;
                match f {
                    Func::Exp => v.exp(),
                    Func::Log => {
                        if v <= 0 {
                            return Err("log of a non-positive value".into());
                        }
                        v.ln()
                    }
                    Func::Sqrt => {
                        if v < 0 {
                            return Err("sqrt of a negative value".into());
                        }
                        v.sqrt()
                    }
                    Func::Cosh => v.cosh(),
                    Func::Sinh => v.sinh(),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err("non-finite intermediate value".into())
        }
    }

    /// Coefficients (constant term first) when the expression is a polynomial
    /// in `x` with rational coefficients.
    pub fn as_polynomial(&self) -> Option<Vec<Rational>> {
        Some(trim(match self {
            Expr::Const(r) => vec![r.clone()],
            Expr::X => vec![Rational::new(), Rational::from(1)],
            Expr::Named(_) | Expr::Call(..) => return None,
            Expr::Neg(a) => a.as_polynomial()?.into_iter().map(|c| -c).collect(),
            Expr::Add(a, b) => poly_add(a.as_polynomial()?, b.as_polynomial()?, false),
            Expr::Sub(a, b) => poly_add(a.as_polynomial()?, b.as_polynomial()?, true),
            Expr::Mul(a, b) => poly_mul(&a.as_polynomial()?, &b.as_polynomial()?),
            Expr::Div(a, b) => {
                let d = b.as_polynomial()?;
                let c = trim(d);
                if c.len() != 1 || c[0].is_zero() {
                    return None;
                }
                a.as_polynomial()?.into_iter().map(|v| v / &c[0]).collect()
            }
            Expr::Pow(a, e) => {
                if *e.denom() != 1 || *e < 0 {
                    return None;
                }
                let k = e.numer().to_u32()?;
                let base = a.as_polynomial()?;
                let mut acc = vec![Rational::from(1)];
                for _ in 0..k {
                    acc = poly_mul(&acc, &base);
                }
                acc
            }
        }))
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

fn trim(mut v: Vec<Rational>) -> Vec<Rational> {
    while v.len() > 1 && v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

fn poly_add(a: Vec<Rational>, b: Vec<Rational>, subtract: bool) -> Vec<Rational> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_default();
            let y = b.get(i).cloned().unwrap_or_default();
            if subtract {
                x - y
            } else {
                x + y
            }
        })
        .collect()
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::new(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += Rational::from(x * y);
        }
    }
    out
}

fn fmt_rational(r: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    // constants from the parser are terminating decimals
    if let Some(s) = terminating_decimal(r) {
        write!(f, "{s}")
    } else {
        write!(f, "({}/{})", r.numer(), r.denom())
    }
}

fn terminating_decimal(r: &Rational) -> Option<String> {
    let mut den = r.denom().clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    while den.is_divisible_u(2) {
        den /= 2u32;
        twos += 1;
    }
    while den.is_divisible_u(5) {
        den /= 5u32;
        fives += 1;
    }
    if den != 1 {
        return None;
    }
    let places = twos.max(fives);
    let scaled = Rational::from(r * Integer::from(Integer::u_pow_u(10, places)));
    let digits = scaled.numer().clone().abs().to_string();
    let sign = if *r < 0 { "-" } else { "" };
    if places == 0 {
        return Some(format!("{sign}{digits}"));
    }
    let padded = format!("{digits:0>width$}", width = places as usize + 1);
    let (int, frac) = padded.split_at(padded.len() - places as usize);
    Some(format!("{sign}{int}.{frac}"))
}

/// Renders with the minimal parentheses needed to reparse to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |e: &Expr, min: u8, f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if e.precedence() < min || matches!(e, Expr::Const(r) if *r < 0) {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Const(r) => fmt_rational(r, f),
            Expr::Named(NamedConst::Pi) => write!(f, "pi"),
            Expr::Named(NamedConst::E) => write!(f, "e"),
            Expr::X => write!(f, "x"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                wrap(a, 3, f)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                wrap(a, 1, f)?;
                write!(f, " {} ", if matches!(self, Expr::Add(..)) { "+" } else { "-" })?;
                wrap(b, 2, f)
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                wrap(a, 2, f)?;
                write!(f, "{}", if matches!(self, Expr::Mul(..)) { "*" } else { "/" })?;
                wrap(b, 3, f)
            }
            Expr::Pow(a, e) => {
                wrap(a, 5, f)?;
                write!(f, "^")?;
                if *e.denom() == 1 && *e >= 0 {
                    write!(f, "{}", e.numer())
                } else {
                    let sign = if *e < 0 { "-" } else { "" };
                    write!(f, "({sign}{}/{})", e.numer().clone().abs(), e.denom())
                }
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(char),
}

struct Lexed {
    toks: Vec<(Tok, usize)>,
    end: usize,
}

fn lex(src: &str) -> Result<Lexed, DslError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent part, only when followed by digits
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let value = parse_rational(text).ok_or_else(|| DslError::Syntax {
                offset: start,
                expected: vec!["number".into()],
            })?;
            toks.push((Tok::Num(value), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            toks.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^(),".contains(c) {
            toks.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(DslError::Syntax {
                offset: i,
                expected: vec!["expression".into()],
            });
        }
    }
    Ok(Lexed { toks, end: src.len() })
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), DslError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.syntax(&[&c.to_string()]))
        }
    }

    fn syntax(&self, expected: &[&str]) -> DslError {
        DslError::Syntax {
            offset: self.offset(),
            expected: expected.iter().map(|s| format!("\"{s}\"")).collect(),
        }
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::add(lhs, self.term()?);
            } else if self.eat('-') {
                lhs = Expr::sub(lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::mul(lhs, self.unary()?);
            } else if self.eat('/') {
                lhs = Expr::div(lhs, self.unary()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, DslError> {
        let base = self.primary()?;
        if self.eat('^') {
            let offset = self.offset();
            let e = self.exponent()?;
            let q = fold_rational(&e).ok_or(DslError::NonConstantExponent { offset })?;
            return Ok(Expr::Pow(Box::new(base), q));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Expr, DslError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.exponent()?)));
        }
        self.power()
    }

    fn primary(&mut self) -> Result<Expr, DslError> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "x" => return Ok(Expr::X),
                    "pi" => return Ok(Expr::Named(NamedConst::Pi)),
                    "e" => return Ok(Expr::Named(NamedConst::E)),
                    _ => {}
                }
                let func = Func::from_name(&name).ok_or(DslError::UnknownIdentifier {
                    name: name.clone(),
                    offset,
                })?;
                self.expect('(')?;
                let arg = self.expr()?;
                let mut got = 1;
                while self.eat(',') {
                    self.expr()?;
                    got += 1;
                }
                if got != 1 {
                    return Err(DslError::Arity {
                        func: name,
                        offset,
                        got,
                    });
                }
                self.expect(')')?;
                Ok(Expr::call(func, arg))
            }
            _ => Err(self.syntax(&["number", "x", "(", "-", "function"])),
        }
    }
}

fn fold_rational(e: &Expr) -> Option<Rational> {
    Some(match e {
        Expr::Const(r) => r.clone(),
        Expr::Neg(a) => -fold_rational(a)?,
        Expr::Add(a, b) => fold_rational(a)? + fold_rational(b)?,
        Expr::Sub(a, b) => fold_rational(a)? - fold_rational(b)?,
        Expr::Mul(a, b) => fold_rational(a)? * fold_rational(b)?,
        Expr::Div(a, b) => {
            let d = fold_rational(b)?;
            if d.is_zero() {
                return None;
            }
            fold_rational(a)? / d
        }
        Expr::Pow(a, q) if *q.denom() == 1 => {
            let base = fold_rational(a)?;
            let k = q.numer().to_i32()?;
            if k < 0 && base.is_zero() {
                return None;
            }
            base.pow(k)
        }
        _ => return None,
    })
}

/// Minimum found by the sampling positivity check.
#[derive(Clone, Debug, PartialEq)]
pub struct PositivityCertificate {
    pub min_value: BigReal,
    pub argmin: BigReal,
    pub samples: usize,
}

/// A parsed perturbation `h(x)`.
///
/// The positivity certificate is sampling based: `h` was evaluated at
/// Chebyshev points and both endpoints and found positive there. It is not a
/// proof of positivity on the whole interval.
#[derive(Clone, Debug)]
pub struct PerturbationFn {
    source: String,
    expr: Expr,
    certificate: Option<PositivityCertificate>,
}

impl PerturbationFn {
    pub fn from_expr(expr: Expr) -> Self {
        PerturbationFn {
            source: expr.to_string(),
            expr,
            certificate: None,
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn certificate(&self) -> Option<&PositivityCertificate> {
        self.certificate.as_ref()
    }

    pub fn is_identity(&self) -> bool {
        self.expr == Expr::Const(Rational::from(1))
    }

    pub fn eval(&self, x: &BigReal) -> Result<BigReal, DslError> {
        self.expr.eval(x).map_err(|detail| DslError::Evaluation {
            x: x.to_string_radix(10, Some(20)),
            detail,
        })
    }

    pub fn eval_ln(&self, x: &BigReal) -> Result<BigReal, DslError> {
        let v = self.eval(x)?;
        if v <= 0 {
            return Err(DslError::NotPositive {
                x: x.to_string_radix(10, Some(20)),
                value: v.to_string_radix(10, Some(20)),
            });
        }
        Ok(v.ln())
    }

    pub fn as_polynomial(&self) -> Option<Vec<Rational>> {
        self.expr.as_polynomial()
    }
}

pub fn parse_h(source: &str) -> Result<PerturbationFn, DslError> {
    let lexed = lex(source)?;
    let mut parser = Parser {
        toks: lexed.toks,
        pos: 0,
        end: lexed.end,
    };
    let expr = parser.expr()?;
    if parser.pos != parser.toks.len() {
        return Err(parser.syntax(&["operator", "end of input"]));
    }
    Ok(PerturbationFn {
        source: source.to_string(),
        expr,
        certificate: None,
    })
}

/// Default number of Chebyshev sample points for [`validate_positive`].
pub const DEFAULT_POSITIVITY_SAMPLES: usize = 257;

/// Samples `h` at `samples` Chebyshev points and at `±1`, rejecting it if any
/// value is non-positive or fails to evaluate.
pub fn validate_positive(h: PerturbationFn, samples: usize, p: Precision) -> Result<PerturbationFn, DslError> {
    let bits = p.bits();
    let mut points = vec![Float::with_val(bits, -1), Float::with_val(bits, 1)];
    let pi = pi(bits);
    for j in 0..samples {
        let theta = Float::with_val(bits, &pi * (2 * j + 1) as u32) / (2 * samples) as u32;
        points.push(theta.cos());
    }
    let mut best: Option<(BigReal, BigReal)> = None;
    for x in points {
        let v = h.eval(&x)?;
        if best.as_ref().is_none_or(|(m, _)| v < *m) {
            best = Some((v, x));
        }
    }
    let (min_value, argmin) = best.expect("at least the endpoints are sampled");
    if min_value <= 0 {
        return Err(DslError::NotPositive {
            x: argmin.to_string_radix(10, Some(20)),
            value: min_value.to_string_radix(10, Some(20)),
        });
    }
    Ok(PerturbationFn {
        certificate: Some(PositivityCertificate {
            min_value,
            argmin,
            samples,
        }),
        ..h
    })
}

/// Named perturbation families, built without going through the parser.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `h ≡ 1`
    One,
    /// `h = c`
    Constant(Rational),
    /// `h = exp(t·x)`
    ExpLinear(Rational),
    /// `h = exp(t·T_2(x)) = exp(t(2x² - 1))`
    ExpT2(Rational),
    /// `h = 1 + c·x²`
    OnePlusQuadratic(Rational),
}

impl Family {
    pub fn to_expr(&self) -> Expr {
        let x2 = || Expr::pow(Expr::X, 2);
        match self {
            Family::One => Expr::num(1),
            Family::Constant(c) => Expr::Const(c.clone()),
            Family::ExpLinear(t) => Expr::call(Func::Exp, Expr::mul(Expr::Const(t.clone()), Expr::X)),
            Family::ExpT2(t) => Expr::call(
                Func::Exp,
                Expr::mul(
                    Expr::Const(t.clone()),
                    Expr::sub(Expr::mul(Expr::num(2), x2()), Expr::num(1)),
                ),
            ),
            Family::OnePlusQuadratic(c) => Expr::add(Expr::num(1), Expr::mul(Expr::Const(c.clone()), x2())),
        }
    }

    pub fn build(&self) -> PerturbationFn {
        PerturbationFn::from_expr(self.to_expr())
    }
}
