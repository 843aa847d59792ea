//! Closed-form functions of the chart coordinates `(z, theta)`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    Z,
    Theta,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::Z => "z",
            Var::Theta => "theta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// The constant `pi`, kept symbolic so it prints back as written.
    Pi,
    Var(Var),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: expected {}", .expected.join(" or "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("pole at z={z}, theta={theta}")]
    Pole { z: f64, theta: f64 },
}

/// A point in the `(z, theta)` chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub z: f64,
    pub theta: f64,
}

impl Point {
    pub fn new(z: f64, theta: f64) -> Self {
        Point { z, theta }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn fail<T>(&mut self, expected: &[&str]) -> Result<T, ParseError> {
        self.skip_ws();
        Err(ParseError {
            offset: self.pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(&[&format!("'{}'", c as char)])
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
            match digits.parse::<u32>() {
                Ok(n) => Ok(Expr::Pow(Box::new(base), n)),
                Err(_) => {
                    self.pos = start;
                    self.fail(&["integer exponent"])
                }
            }
        } else {
            Ok(base)
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos > s
        };
        let mut any = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            any |= digits(self);
        }
        if !any {
            self.pos = start;
            return self.fail(&["number"]);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if !digits(self) {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match text.parse::<f64>() {
            Ok(v) => Ok(Expr::Const(v)),
            Err(_) => {
                self.pos = start;
                self.fail(&["number"])
            }
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        const BASE: &[&str] = &["number", "'pi'", "variable", "function", "'('", "'-'"];
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.base()?)))
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
                    self.pos += 1;
                }
                let word = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                let func = match word {
                    "z" => return Ok(Expr::Var(Var::Z)),
                    "theta" => return Ok(Expr::Var(Var::Theta)),
                    "pi" => return Ok(Expr::Pi),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    _ => {
                        self.pos = start;
                        return self.fail(BASE);
                    }
                };
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            _ => self.fail(BASE),
        }
    }
}

/// Parses an expression in `z` and `theta`.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.fail(&["operator", "end of input"]);
    }
    Ok(e)
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

fn pole(p: Point) -> EvalError {
    EvalError::Pole { z: p.z, theta: p.theta }
}

impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn eval(&self, p: Point) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Pi => std::f64::consts::PI,
            Expr::Var(Var::Z) => p.z,
            Expr::Var(Var::Theta) => p.theta,
            Expr::Add(a, b) => a.eval(p)? + b.eval(p)?,
            Expr::Sub(a, b) => a.eval(p)? - b.eval(p)?,
            Expr::Mul(a, b) => a.eval(p)? * b.eval(p)?,
            Expr::Div(a, b) => {
                let d = b.eval(p)?;
                if d == 0.0 {
                    return Err(pole(p));
                }
                a.eval(p)? / d
            }
            Expr::Pow(a, n) => a.eval(p)?.powi(*n as i32),
            Expr::Neg(a) => -a.eval(p)?,
            Expr::Call(Func::Sin, a) => a.eval(p)?.sin(),
            Expr::Call(Func::Cos, a) => a.eval(p)?.cos(),
            Expr::Call(Func::Exp, a) => a.eval(p)?.exp(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(pole(p))
        }
    }

    /// Exact symbolic derivative, simplified.
    pub fn differentiate(&self, var: Var) -> Expr {
        simplify(&self.derive(var))
    }

    fn derive(&self, var: Var) -> Expr {
        use Expr::*;
        let b = |e: Expr| Box::new(e);
        match self {
            Const(_) | Pi => Const(0.0),
            Var(v) => Const(if *v == var { 1.0 } else { 0.0 }),
            Add(x, y) => Add(b(x.derive(var)), b(y.derive(var))),
            Sub(x, y) => Sub(b(x.derive(var)), b(y.derive(var))),
            Mul(x, y) => Add(
                b(Mul(b(x.derive(var)), y.clone())),
                b(Mul(x.clone(), b(y.derive(var)))),
            ),
            Div(x, y) => Div(
                b(Sub(
                    b(Mul(b(x.derive(var)), y.clone())),
                    b(Mul(x.clone(), b(y.derive(var)))),
                )),
                b(Pow(y.clone(), 2)),
            ),
            Pow(_, 0) => Const(0.0),
            Pow(x, n) => Mul(
                b(Mul(b(Const(*n as f64)), b(Pow(x.clone(), n - 1)))),
                b(x.derive(var)),
            ),
            Neg(x) => Neg(b(x.derive(var))),
            Call(Func::Sin, x) => Mul(b(Call(Func::Cos, x.clone())), b(x.derive(var))),
            Call(Func::Cos, x) => Neg(b(Mul(b(Call(Func::Sin, x.clone())), b(x.derive(var))))),
            Call(Func::Exp, x) => Mul(b(self.clone()), b(x.derive(var))),
        }
    }

    /// Whether the expression mentions `var`.
    pub fn depends_on(&self, var: Var) -> bool {
        match self {
            Expr::Const(_) | Expr::Pi => false,
            Expr::Var(v) => *v == var,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.depends_on(var) || b.depends_on(var)
            }
            Expr::Pow(a, _) | Expr::Neg(a) | Expr::Call(_, a) => a.depends_on(var),
        }
    }

    fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Pow(..) => 3,
            Expr::Const(c) if *c < 0.0 => 3,
            _ => 4,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "(")?;
            self.write_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(f, "-")?;
                    write_number(f, -c)
                } else {
                    write_number(f, *c)
                }
            }
            Expr::Pi => write!(f, "pi"),
            Expr::Var(v) => write!(f, "{}", v.name()),
            Expr::Add(a, b) => {
                a.write_at(f, 1)?;
                write!(f, "+")?;
                b.write_at(f, 2)
            }
            Expr::Sub(a, b) => {
                a.write_at(f, 1)?;
                write!(f, "-")?;
                b.write_at(f, 2)
            }
            Expr::Mul(a, b) => {
                a.write_at(f, 2)?;
                write!(f, "*")?;
                b.write_at(f, 3)
            }
            Expr::Div(a, b) => {
                a.write_at(f, 2)?;
                write!(f, "/")?;
                b.write_at(f, 3)
            }
            // The base of a power must be a base production, not a negation.
            Expr::Pow(a, n) => {
                a.write_at(f, 4)?;
                write!(f, "^{n}")
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.write_at(f, 4)
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write_at(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    // Debug formatting of f64 is shortest round-trip and always parses back.
    let s = format!("{c:?}");
    write!(f, "{}", s.strip_suffix(".0").unwrap_or(&s))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

/// Constant folding and the `0`/`1` identities.
pub fn simplify(e: &Expr) -> Expr {
    use Expr::*;
    let b = |e: Expr| Box::new(e);
    match e {
        Const(_) | Pi | Var(_) => e.clone(),
        Add(x, y) => {
            let (x, y) = (simplify(x), simplify(y));
            match (x.as_const(), y.as_const()) {
                (Some(a), Some(c)) => Const(a + c),
                (Some(a), _) if a == 0.0 => y,
                (_, Some(c)) if c == 0.0 => x,
                _ => Add(b(x), b(y)),
            }
        }
        Sub(x, y) => {
            let (x, y) = (simplify(x), simplify(y));
            match (x.as_const(), y.as_const()) {
                (Some(a), Some(c)) => Const(a - c),
                (Some(a), _) if a == 0.0 => simplify(&Neg(b(y))),
                (_, Some(c)) if c == 0.0 => x,
                _ => Sub(b(x), b(y)),
            }
        }
        Mul(x, y) => {
            let (x, y) = (simplify(x), simplify(y));
            match (x.as_const(), y.as_const()) {
                (Some(a), Some(c)) => Const(a * c),
                (Some(a), _) if a == 0.0 => Const(0.0),
                (_, Some(c)) if c == 0.0 => Const(0.0),
                (Some(a), _) if a == 1.0 => y,
                (_, Some(c)) if c == 1.0 => x,
                _ => Mul(b(x), b(y)),
            }
        }
        Div(x, y) => {
            let (x, y) = (simplify(x), simplify(y));
            match (x.as_const(), y.as_const()) {
                (Some(a), Some(c)) if c != 0.0 => Const(a / c),
                (_, Some(c)) if c == 1.0 => x,
                _ => Div(b(x), b(y)),
            }
        }
        Pow(x, n) => {
            let x = simplify(x);
            match (*n, x.as_const()) {
                (0, _) => Const(1.0),
                (1, _) => x,
                (n, Some(a)) => Const(a.powi(n as i32)),
                _ => Pow(b(x), *n),
            }
        }
        Neg(x) => {
            let x = simplify(x);
            match x {
                Const(a) => Const(-a),
                Neg(inner) => *inner,
                _ => Neg(b(x)),
            }
        }
        Call(func, x) => {
            let x = simplify(x);
            match x.as_const() {
                Some(a) => Const(match func {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                }),
                None => Call(*func, b(x)),
            }
        }
    }
}
