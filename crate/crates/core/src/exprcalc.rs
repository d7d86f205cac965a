//! Closed-form expressions in one variable `t`, with values and Taylor jets.
//!
//! Grammar (standard precedence, `^` right-associative and binding tighter
//! than unary minus, so `-t^2` is `-(t^2)`):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | 't' | 'pi' | func '(' expr ')' | '(' expr ')'
//! func    := exp | log | sin | cos | sqrt | abs
//! ```

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => write!(f, "t"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(x, y) => write!(f, "({x} + {y})"),
            Expr::Sub(x, y) => write!(f, "({x} - {y})"),
            Expr::Mul(x, y) => write!(f, "({x} * {y})"),
            Expr::Div(x, y) => write!(f, "({x} / {y})"),
            Expr::Pow(x, y) => write!(f, "({x} ^ {y})"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(usize, Tok)> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((start, Tok::End));
        };
        if c.is_ascii_digit() || c == b'.' {
            let mut end = start;
            while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                end += 1;
            }
            if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                let mut k = end + 1;
                if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                    k += 1;
                }
                if k < bytes.len() && bytes[k].is_ascii_digit() {
                    while k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                    }
                    end = k;
                }
            }
            let text = &self.src[start..end];
            let value = text.parse::<f64>().map_err(|_| Error::Syntax {
                offset: start,
                message: format!("malformed number '{text}'"),
            })?;
            self.pos = end;
            return Ok((start, Tok::Num(value)));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let mut end = start;
            while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                end += 1;
            }
            self.pos = end;
            return Ok((start, Tok::Ident(self.src[start..end].to_string())));
        }
        if b"+-*/^(),".contains(&c) {
            self.pos += 1;
            return Ok((start, Tok::Sym(c as char)));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(Error::Syntax {
            offset: start,
            message: format!("unexpected character '{ch}'"),
        })
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    offset: usize,
    tok: Tok,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self> {
        let mut lexer = Lexer { src, pos: 0 };
        let (offset, tok) = lexer.next()?;
        Ok(Parser { lexer, offset, tok })
    }

    fn bump(&mut self) -> Result<()> {
        let (offset, tok) = self.lexer.next()?;
        self.offset = offset;
        self.tok = tok;
        Ok(())
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            offset: self.offset,
            message: message.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.tok == Tok::Sym(c) {
            self.bump()
        } else if self.tok == Tok::End {
            self.fail(format!("expected '{c}' but input ended"))
        } else {
            self.fail(format!("expected '{c}'"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.tok {
                Tok::Sym('+') => {
                    self.bump()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Sym('-') => {
                    self.bump()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.tok {
                Tok::Sym('*') => {
                    self.bump()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Sym('/') => {
                    self.bump()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.tok {
            Tok::Sym('-') => {
                self.bump()?;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Sym('+') => {
                self.bump()?;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.tok == Tok::Sym('^') {
            self.bump()?;
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Expr::Const(v))
            }
            Tok::Ident(name) => {
                if name == "t" {
                    self.bump()?;
                    return Ok(Expr::Var);
                }
                if name == "pi" {
                    self.bump()?;
                    return Ok(Expr::Const(std::f64::consts::PI));
                }
                let Some(func) = Func::from_name(&name) else {
                    return self.fail(format!("unknown identifier '{name}'"));
                };
                self.bump()?;
                self.expect('(')?;
                let arg = self.expr()?;
                self.expect(')')?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Tok::Sym('(') => {
                self.bump()?;
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::End => self.fail("unexpected end of input"),
            Tok::Sym(c) => self.fail(format!("unexpected '{c}'")),
        }
    }
}

/// Parses an expression in `t`.
pub fn parse(src: &str) -> Result<Expr> {
    let mut parser = Parser::new(src)?;
    let e = parser.expr()?;
    if parser.tok != Tok::End {
        return parser.fail("trailing input");
    }
    Ok(e)
}

fn domain_at(what: &str, t: f64) -> Error {
    Error::Domain(format!("{what} at t = {t}"))
}

/// Integer exponents up to this size use repeated squaring.
const MAX_INT_POWER: f64 = 4096.0;

fn integer_exponent(e: &Expr) -> Option<i64> {
    if e.depends_on_t() {
        return None;
    }
    let v = e.eval(0.0).ok()?;
    (v.fract() == 0.0 && v.abs() <= MAX_INT_POWER).then_some(v as i64)
}

impl Expr {
    pub fn depends_on_t(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var => true,
            Expr::Neg(e) | Expr::Call(_, e) => e.depends_on_t(),
            Expr::Add(x, y)
            | Expr::Sub(x, y)
            | Expr::Mul(x, y)
            | Expr::Div(x, y)
            | Expr::Pow(x, y) => x.depends_on_t() || y.depends_on_t(),
        }
    }

    /// Degree when the expression is syntactically a polynomial in `t`.
    pub fn polynomial_degree(&self) -> Option<usize> {
        if !self.depends_on_t() {
            return Some(0);
        }
        match self {
            Expr::Var => Some(1),
            Expr::Neg(e) => e.polynomial_degree(),
            Expr::Add(x, y) | Expr::Sub(x, y) => {
                Some(x.polynomial_degree()?.max(y.polynomial_degree()?))
            }
            Expr::Mul(x, y) => Some(x.polynomial_degree()? + y.polynomial_degree()?),
            Expr::Div(x, y) if !y.depends_on_t() => x.polynomial_degree(),
            Expr::Pow(x, y) => {
                let k = integer_exponent(y)?;
                (k >= 0).then(|| x.polynomial_degree().map(|d| d * k as usize))?
            }
            _ => None,
        }
    }

    fn singular_parts<'a>(&'a self, out: &mut Vec<&'a Expr>) {
        match self {
            Expr::Const(_) | Expr::Var => {}
            Expr::Neg(e) => e.singular_parts(out),
            Expr::Call(func, e) => {
                if *func == Func::Log {
                    out.push(e);
                }
                e.singular_parts(out);
            }
            Expr::Add(x, y) | Expr::Sub(x, y) | Expr::Mul(x, y) => {
                x.singular_parts(out);
                y.singular_parts(out);
            }
            Expr::Div(x, y) => {
                if y.depends_on_t() {
                    out.push(y);
                }
                x.singular_parts(out);
                y.singular_parts(out);
            }
            Expr::Pow(x, y) => {
                let negative = !y.depends_on_t() && y.eval(0.0).is_ok_and(|p| p < 0.0);
                if negative && x.depends_on_t() {
                    out.push(x);
                }
                x.singular_parts(out);
                y.singular_parts(out);
            }
        }
    }

    /// Rejects expressions with a pole or an undefined point on
    /// `[lo, hi]`, scanned on `samples` equispaced points. An infinite end
    /// is replaced by a point 100 units from the finite one.
    pub fn check_interval(&self, lo: f64, hi: f64, samples: usize) -> Result<()> {
        let (lo, hi) = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => (lo, hi),
            (true, false) => (lo, lo + 100.0),
            (false, true) => (hi - 100.0, hi),
            (false, false) => (-100.0, 100.0),
        };
        let samples = samples.max(2);
        let grid: Vec<f64> = (0..samples)
            .map(|i| lo + (hi - lo) * i as f64 / (samples - 1) as f64)
            .collect();
        for &t in &grid {
            self.eval(t)?;
        }
        let mut parts = Vec::new();
        self.singular_parts(&mut parts);
        for part in parts {
            let values = grid
                .iter()
                .map(|&t| part.eval(t))
                .collect::<Result<Vec<f64>>>()?;
            for (k, w) in values.windows(2).enumerate() {
                if w[0].signum() != w[1].signum() {
                    let at = 0.5 * (grid[k] + grid[k + 1]);
                    return Err(domain_at("singularity inside the interval", at));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var => t,
            Expr::Neg(e) => -e.eval(t)?,
            Expr::Add(x, y) => x.eval(t)? + y.eval(t)?,
            Expr::Sub(x, y) => x.eval(t)? - y.eval(t)?,
            Expr::Mul(x, y) => x.eval(t)? * y.eval(t)?,
            Expr::Div(x, y) => {
                let d = y.eval(t)?;
                if d == 0.0 {
                    return Err(domain_at("division by zero", t));
                }
                x.eval(t)? / d
            }
            Expr::Pow(x, y) => {
                let base = x.eval(t)?;
                if let Some(k) = integer_exponent(y) {
                    if base == 0.0 && k < 0 {
                        return Err(domain_at("negative power of zero", t));
                    }
                    base.powi(k as i32)
                } else {
                    let p = y.eval(t)?;
                    if base < 0.0 || (base == 0.0 && p <= 0.0) {
                        return Err(domain_at("real power of a non-positive base", t));
                    }
                    base.powf(p)
                }
            }
            Expr::Call(func, e) => {
                let x = e.eval(t)?;
                match func {
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(domain_at("log of a non-positive number", t));
                        }
                        x.ln()
                    }
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(domain_at("sqrt of a negative number", t));
                        }
                        x.sqrt()
                    }
                    Func::Abs => x.abs(),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(domain_at("non-finite value", t))
        }
    }

    /// Taylor coefficients `f^(k)(anchor)/k!` for `k = 0..=order`.
    pub fn jet(&self, anchor: f64, order: usize) -> Result<TaylorJet> {
        let coeffs = self.series(anchor, order)?;
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(domain_at("non-finite Taylor coefficient", anchor));
        }
        Ok(TaylorJet { anchor, coeffs })
    }

    fn series(&self, x0: f64, order: usize) -> Result<Vec<f64>> {
        let len = order + 1;
        Ok(match self {
            Expr::Const(c) => {
                let mut v = vec![0.0; len];
                v[0] = *c;
                v
            }
            Expr::Var => {
                let mut v = vec![0.0; len];
                v[0] = x0;
                if len > 1 {
                    v[1] = 1.0;
                }
                v
            }
            Expr::Neg(e) => e.series(x0, order)?.into_iter().map(|c| -c).collect(),
            Expr::Add(x, y) => zip_with(&x.series(x0, order)?, &y.series(x0, order)?, |a, b| a + b),
            Expr::Sub(x, y) => zip_with(&x.series(x0, order)?, &y.series(x0, order)?, |a, b| a - b),
            Expr::Mul(x, y) => series_mul(&x.series(x0, order)?, &y.series(x0, order)?),
            Expr::Div(x, y) => {
                let d = y.series(x0, order)?;
                if d[0] == 0.0 {
                    return Err(domain_at("division by zero", x0));
                }
                series_div(&x.series(x0, order)?, &d)
            }
            Expr::Pow(x, y) => {
                let base = x.series(x0, order)?;
                if let Some(k) = integer_exponent(y) {
                    if base[0] == 0.0 && k < 0 {
                        return Err(domain_at("negative power of zero", x0));
                    }
                    series_powi(&base, k)
                } else {
                    if base[0] <= 0.0 {
                        return Err(domain_at("real power of a non-positive base", x0));
                    }
                    let log_base = series_log(&base);
                    let expo = y.series(x0, order)?;
                    series_exp(&series_mul(&expo, &log_base))
                }
            }
            Expr::Call(func, e) => {
                let a = e.series(x0, order)?;
                match func {
                    Func::Exp => series_exp(&a),
                    Func::Log => {
                        if a[0] <= 0.0 {
                            return Err(domain_at("log of a non-positive number", x0));
                        }
                        series_log(&a)
                    }
                    Func::Sin => series_sin_cos(&a).0,
                    Func::Cos => series_sin_cos(&a).1,
                    Func::Sqrt => {
                        if a[0] < 0.0 || (a[0] == 0.0 && order > 0) {
                            return Err(domain_at("sqrt is not differentiable", x0));
                        }
                        series_sqrt(&a)
                    }
                    Func::Abs => {
                        if a[0] > 0.0 {
                            a
                        } else if a[0] < 0.0 {
                            a.into_iter().map(|c| -c).collect()
                        } else if order == 0 {
                            vec![0.0]
                        } else {
                            return Err(domain_at("abs is not differentiable at zero", x0));
                        }
                    }
                }
            }
        })
    }
}

fn zip_with(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

fn series_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    (0..a.len())
        .map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum())
        .collect()
}

fn series_div(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut c: Vec<f64> = Vec::with_capacity(a.len());
    for k in 0..a.len() {
        let acc: f64 = (1..=k).map(|i| b[i] * c[k - i]).sum();
        c.push((a[k] - acc) / b[0]);
    }
    c
}

fn series_exp(a: &[f64]) -> Vec<f64> {
    let mut e: Vec<f64> = Vec::with_capacity(a.len());
    e.push(a[0].exp());
    for k in 1..a.len() {
        let acc: f64 = (1..=k).map(|i| i as f64 * a[i] * e[k - i]).sum();
        e.push(acc / k as f64);
    }
    e
}

fn series_log(a: &[f64]) -> Vec<f64> {
    let mut l: Vec<f64> = Vec::with_capacity(a.len());
    l.push(a[0].ln());
    for k in 1..a.len() {
        let acc: f64 = (1..k).map(|i| i as f64 * l[i] * a[k - i]).sum();
        l.push((a[k] - acc / k as f64) / a[0]);
    }
    l
}

fn series_sin_cos(a: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut s = Vec::with_capacity(a.len());
    let mut c = Vec::with_capacity(a.len());
    s.push(a[0].sin());
    c.push(a[0].cos());
    for k in 1..a.len() {
        let mut ds = 0.0;
        let mut dc = 0.0;
        for i in 1..=k {
            ds += i as f64 * a[i] * c[k - i];
            dc += i as f64 * a[i] * s[k - i];
        }
        s.push(ds / k as f64);
        c.push(-dc / k as f64);
    }
    (s, c)
}

fn series_sqrt(a: &[f64]) -> Vec<f64> {
    let mut q: Vec<f64> = Vec::with_capacity(a.len());
    q.push(a[0].sqrt());
    for k in 1..a.len() {
        let acc: f64 = (1..k).map(|i| q[i] * q[k - i]).sum();
        q.push((a[k] - acc) / (2.0 * q[0]));
    }
    q
}

fn series_powi(a: &[f64], k: i64) -> Vec<f64> {
    let mut acc = vec![0.0; a.len()];
    acc[0] = 1.0;
    let mut base = a.to_vec();
    let mut e = k.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            acc = series_mul(&acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = series_mul(&base, &base);
        }
    }
    if k < 0 {
        let mut one = vec![0.0; a.len()];
        one[0] = 1.0;
        series_div(&one, &acc)
    } else {
        acc
    }
}

/// Truncated Taylor expansion at `anchor`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorJet {
    pub anchor: f64,
    /// `c_k = f^(k)(anchor) / k!`
    pub coeffs: Vec<f64>,
}

impl TaylorJet {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Plain derivatives `f^(k)(anchor)`.
    pub fn derivatives(&self) -> Vec<f64> {
        let mut factorial = 1.0;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                if k > 0 {
                    factorial *= k as f64;
                }
                c * factorial
            })
            .collect()
    }

    /// Value of the truncated series at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let u = t - self.anchor;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    pub fn mul(&self, other: &TaylorJet) -> TaylorJet {
        let len = self.coeffs.len().min(other.coeffs.len());
        TaylorJet {
            anchor: self.anchor,
            coeffs: series_mul(&self.coeffs[..len], &other.coeffs[..len]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol * (1.0 + y.abs()), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn parse_examples() {
        assert!(parse("1/(1+t^2)").is_ok());
        assert!(parse("exp(-t)*t").is_ok());
        match parse("1/(1+") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse("foo(t)"),
            Err(Error::Syntax { offset: 0, .. })
        ));
        assert!(matches!(parse("t t"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(
            parse("2 $ t"),
            Err(Error::Syntax { offset: 2, .. })
        ));
    }

    #[test]
    fn precedence() {
        let e = parse("-t^2").unwrap();
        assert_eq!(e.eval(3.0).unwrap(), -9.0);
        assert_eq!(parse("2^3^2").unwrap().eval(0.0).unwrap(), 512.0);
        assert_eq!(parse("1-2-3").unwrap().eval(0.0).unwrap(), -4.0);
        assert_eq!(parse("8/4/2").unwrap().eval(0.0).unwrap(), 1.0);
        assert_eq!(parse("2*t^-1").unwrap().eval(4.0).unwrap(), 0.5);
        assert_eq!(parse("1.5e1 + .5").unwrap().eval(0.0).unwrap(), 15.5);
    }

    #[test]
    fn eval_examples() {
        assert_eq!(parse("t^2").unwrap().eval(3.0).unwrap(), 9.0);
        assert_eq!(parse("sin(0)").unwrap().eval(0.0).unwrap(), 0.0);
        assert!(matches!(
            parse("1/(t-2)").unwrap().eval(2.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            parse("log(t)").unwrap().eval(-1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            parse("sqrt(t)").unwrap().eval(-1.0),
            Err(Error::Domain(_))
        ));
        assert_relative_eq!(parse("cos(pi)").unwrap().eval(0.0).unwrap(), -1.0);
    }

    #[test]
    fn jet_examples() {
        close(
            &parse("1/(1+t^2)").unwrap().jet(0.0, 4).unwrap().coeffs,
            &[1.0, 0.0, -1.0, 0.0, 1.0],
            1e-15,
        );
        close(
            &parse("exp(t)").unwrap().jet(0.0, 3).unwrap().coeffs,
            &[1.0, 1.0, 0.5, 1.0 / 6.0],
            1e-15,
        );
        close(
            &parse("1/(t-2)").unwrap().jet(1.0, 2).unwrap().coeffs,
            &[-1.0, -1.0, -1.0],
            1e-15,
        );
        assert!(matches!(
            parse("abs(t)").unwrap().jet(0.0, 1),
            Err(Error::Domain(_))
        ));
        assert_eq!(
            parse("abs(t)").unwrap().jet(0.0, 0).unwrap().coeffs,
            vec![0.0]
        );
        close(
            &parse("abs(t)^3").unwrap().jet(-2.0, 3).unwrap().coeffs,
            &[8.0, -12.0, 6.0, -1.0],
            1e-15,
        );
    }

    #[test]
    fn jets_of_elementary_functions() {
        let x0 = 0.7;
        // log, sqrt, sin, cos, real powers against known derivatives
        let j = parse("log(t)").unwrap().jet(x0, 3).unwrap().derivatives();
        close(
            &j,
            &[x0.ln(), 1.0 / x0, -1.0 / (x0 * x0), 2.0 / x0.powi(3)],
            1e-14,
        );
        let j = parse("sqrt(t)").unwrap().jet(x0, 2).unwrap().derivatives();
        close(
            &j,
            &[x0.sqrt(), 0.5 / x0.sqrt(), -0.25 * x0.powf(-1.5)],
            1e-14,
        );
        let j = parse("sin(2*t)").unwrap().jet(x0, 2).unwrap().derivatives();
        close(
            &j,
            &[
                (2.0 * x0).sin(),
                2.0 * (2.0 * x0).cos(),
                -4.0 * (2.0 * x0).sin(),
            ],
            1e-14,
        );
        let j = parse("t^2.5").unwrap().jet(x0, 2).unwrap().derivatives();
        close(
            &j,
            &[x0.powf(2.5), 2.5 * x0.powf(1.5), 3.75 * x0.powf(0.5)],
            1e-13,
        );
        let j = parse("t^t").unwrap().jet(x0, 1).unwrap().derivatives();
        close(&j, &[x0.powf(x0), x0.powf(x0) * (x0.ln() + 1.0)], 1e-13);
    }

    #[test]
    fn jet_matches_finite_differences() {
        let exprs = [
            "exp(-t)*t",
            "1/(1+t^2)",
            "sin(t)*cos(3*t)",
            "sqrt(2+t)",
            "log(3+t)^2",
        ];
        let x0 = 0.3;
        let fd = |e: &Expr, h: f64| {
            let f = |k: f64| e.eval(x0 + k * h).unwrap();
            [
                (f(1.0) - f(-1.0)) / (2.0 * h),
                (f(1.0) - 2.0 * f(0.0) + f(-1.0)) / (h * h),
                (f(2.0) - 2.0 * f(1.0) + 2.0 * f(-1.0) - f(-2.0)) / (2.0 * h.powi(3)),
                (f(2.0) - 4.0 * f(1.0) + 6.0 * f(0.0) - 4.0 * f(-1.0) + f(-2.0)) / h.powi(4),
            ]
        };
        for src in exprs {
            let e = parse(src).unwrap();
            let d = e.jet(x0, 4).unwrap().derivatives();
            for k in 0..4 {
                let h = [1e-3, 4e-3, 1e-2, 2e-2][k];
                let (coarse, fine) = (fd(&e, 2.0 * h), fd(&e, h));
                let richardson = (4.0 * fine[k] - coarse[k]) / 3.0;
                let got = d[k + 1];
                let tol = [1e-6, 1e-6, 1e-5, 1e-4][k];
                assert!(
                    (got - richardson).abs() < tol * (1.0 + got.abs()),
                    "{src}: {got} vs {richardson}"
                );
            }
        }
    }

    #[test]
    fn quotient_of_self_is_one() {
        let e = parse("(exp(t)+t^3)/(exp(t)+t^3)").unwrap();
        close(
            &e.jet(0.4, 5).unwrap().coeffs,
            &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            1e-14,
        );
    }

    #[test]
    fn polynomial_degree() {
        assert_eq!(parse("t^3 - 2*t + 1").unwrap().polynomial_degree(), Some(3));
        assert_eq!(parse("(t+1)^2/4").unwrap().polynomial_degree(), Some(2));
        assert_eq!(parse("1/(t-2)").unwrap().polynomial_degree(), None);
        assert_eq!(parse("exp(2)").unwrap().polynomial_degree(), Some(0));
        assert_eq!(parse("t^0.5").unwrap().polynomial_degree(), None);
    }

    #[test]
    fn interval_scan_finds_poles() {
        let ok = parse("1/(t-2) + exp(t)").unwrap();
        assert!(ok.check_interval(-1.0, 1.0, 2001).is_ok());
        for src in ["1/t", "1/(t-0.3)", "(t-0.123)^(-2)", "log(t+0.5)"] {
            let e = parse(src).unwrap();
            assert!(
                matches!(e.check_interval(-1.0, 1.0, 2001), Err(Error::Domain(_))),
                "{src}"
            );
        }
        assert!(parse("1/(1+t)")
            .unwrap()
            .check_interval(0.0, f64::INFINITY, 500)
            .is_ok());
    }
}
