//! Radial profile expressions over r with +, −, ·, /, ^, log, exp, and
//! truncated Taylor arithmetic for their derivatives.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Highest derivative order carried by a [`Jet`].
pub const JET_ORDER: usize = 4;

/// Taylor coefficients c_k = f⁽ᵏ⁾(r)/k! for k ≤ JET_ORDER.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet(pub [f64; JET_ORDER + 1]);

impl Jet {
    pub fn constant(c: f64) -> Self {
        let mut a = [0.0; JET_ORDER + 1];
        a[0] = c;
        Jet(a)
    }

    /// The independent variable at r.
    pub fn variable(r: f64) -> Self {
        let mut a = [0.0; JET_ORDER + 1];
        a[0] = r;
        a[1] = 1.0;
        Jet(a)
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    /// k-th derivative.
    pub fn derivative(&self, k: usize) -> f64 {
        self.0[k] * (1..=k).product::<usize>() as f64
    }

    /// Jet of f′; the top coefficient is lost.
    pub fn differentiate(&self) -> Self {
        let mut a = [0.0; JET_ORDER + 1];
        for k in 0..JET_ORDER {
            a[k] = (k + 1) as f64 * self.0[k + 1];
        }
        Jet(a)
    }

    fn is_constant(&self) -> bool {
        self.0[1..].iter().all(|&c| c == 0.0)
    }

    pub fn exp(&self) -> Self {
        let mut g = [0.0; JET_ORDER + 1];
        g[0] = self.0[0].exp();
        for k in 1..=JET_ORDER {
            g[k] = (1..=k)
                .map(|j| j as f64 * self.0[j] * g[k - j])
                .sum::<f64>()
                / k as f64;
        }
        Jet(g)
    }

    pub fn ln(&self) -> Self {
        let f = &self.0;
        let mut g = [0.0; JET_ORDER + 1];
        g[0] = f[0].ln();
        for k in 1..=JET_ORDER {
            let s: f64 = (1..k).map(|j| j as f64 * g[j] * f[k - j]).sum();
            g[k] = (f[k] - s / k as f64) / f[0];
        }
        Jet(g)
    }

    pub fn powf(&self, a: f64) -> Self {
        if a.fract() == 0.0 && (0.0..=16.0).contains(&a) {
            return (0..a as u32).fold(Jet::constant(1.0), |acc, _| acc * *self);
        }
        let f = &self.0;
        let mut g = [0.0; JET_ORDER + 1];
        g[0] = f[0].powf(a);
        for k in 1..=JET_ORDER {
            let s: f64 = (1..=k)
                .map(|j| ((a + 1.0) * j as f64 - k as f64) * f[j] * g[k - j])
                .sum();
            g[k] = s / (k as f64 * f[0]);
        }
        Jet(g)
    }

    pub fn pow(&self, e: &Jet) -> Self {
        if e.is_constant() {
            self.powf(e.0[0])
        } else {
            (self.ln() * *e).exp()
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet(std::array::from_fn(|k| self.0[k] + o.0[k]))
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet(std::array::from_fn(|k| self.0[k] - o.0[k]))
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet(self.0.map(|c| -c))
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet(std::array::from_fn(|k| {
            (0..=k).map(|j| self.0[j] * o.0[k - j]).sum()
        }))
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let mut q = [0.0; JET_ORDER + 1];
        for k in 0..=JET_ORDER {
            let s: f64 = (1..=k).map(|j| o.0[j] * q[k - j]).sum();
            q[k] = (self.0[k] - s) / o.0[0];
        }
        Jet(q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    R,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Log(Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn num(c: f64) -> Self {
        Expr::Num(c)
    }

    pub fn r() -> Self {
        Expr::R
    }

    pub fn log(self) -> Self {
        Expr::Log(Box::new(self))
    }

    pub fn exp(self) -> Self {
        Expr::Exp(Box::new(self))
    }

    pub fn pow(self, e: Expr) -> Self {
        Expr::Pow(Box::new(self), Box::new(e))
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Expr::Num(c) => *c,
            Expr::R => r,
            Expr::Neg(a) => -a.eval(r),
            Expr::Add(a, b) => a.eval(r) + b.eval(r),
            Expr::Sub(a, b) => a.eval(r) - b.eval(r),
            Expr::Mul(a, b) => a.eval(r) * b.eval(r),
            Expr::Div(a, b) => a.eval(r) / b.eval(r),
            Expr::Pow(a, b) => a.eval(r).powf(b.eval(r)),
            Expr::Log(a) => a.eval(r).ln(),
            Expr::Exp(a) => a.eval(r).exp(),
        }
    }

    pub fn jet(&self, r: f64) -> Jet {
        match self {
            Expr::Num(c) => Jet::constant(*c),
            Expr::R => Jet::variable(r),
            Expr::Neg(a) => -a.jet(r),
            Expr::Add(a, b) => a.jet(r) + b.jet(r),
            Expr::Sub(a, b) => a.jet(r) - b.jet(r),
            Expr::Mul(a, b) => a.jet(r) * b.jet(r),
            Expr::Div(a, b) => a.jet(r) / b.jet(r),
            Expr::Pow(a, b) => a.jet(r).pow(&b.jet(r)),
            Expr::Log(a) => a.jet(r).ln(),
            Expr::Exp(a) => a.jet(r).exp(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(c) if *c < 0.0 => 3,
            _ => 5,
        }
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $v:ident) => {
        impl $tr for Expr {
            type Output = Expr;
            fn $f(self, o: Expr) -> Expr {
                Expr::$v(Box::new(self), Box::new(o))
            }
        }
    };
}
binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        let p = self.precedence();
        match self {
            Expr::Num(c) => write!(f, "{c}"),
            Expr::R => write!(f, "r"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a, 4)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let op = match self {
                    Expr::Add(..) => "+",
                    Expr::Sub(..) => "-",
                    Expr::Mul(..) => "*",
                    _ => "/",
                };
                wrap(f, a, p)?;
                write!(f, "{op}")?;
                wrap(f, b, p + 1)
            }
            Expr::Pow(a, b) => {
                wrap(f, a, 5)?;
                write!(f, "^")?;
                wrap(f, b, 4)
            }
            Expr::Log(a) => write!(f, "log({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    R,
    Func(&'static str),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(s: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v = text
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number '{text}' in '{s}'")))?;
                out.push(Token::Num(v));
            }
            '+' | '-' | '−' | '*' | '·' | '/' | '^' => {
                out.push(Token::Op(match c {
                    '−' => '-',
                    '·' => '*',
                    c => c,
                }));
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphabetic() {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                out.push(match word.as_str() {
                    "r" => Token::R,
                    "log" | "ln" => Token::Func("log"),
                    "exp" => Token::Func("exp"),
                    _ => {
                        return Err(Error::Parse(format!(
                            "unknown identifier '{word}' in '{s}'"
                        )))
                    }
                });
            }
            c => return Err(Error::Parse(format!("unexpected character '{c}' in '{s}'"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("{what} in expression '{}'", self.src))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if c == '+' { lhs + rhs } else { lhs - rhs };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(c @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if c == '*' { lhs * rhs } else { lhs / rhs };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let e = self.unary()?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::R) => Ok(Expr::R),
            Some(Token::Func(name)) => {
                if self.next() != Some(Token::LParen) {
                    return Err(self.err(&format!("expected '(' after {name}")));
                }
                let inner = self.expr()?;
                if self.next() != Some(Token::RParen) {
                    return Err(self.err("missing ')'"));
                }
                Ok(if name == "log" {
                    inner.log()
                } else {
                    inner.exp()
                })
            }
            Some(Token::LParen) => {
                let inner = self.expr()?;
                if self.next() != Some(Token::RParen) {
                    return Err(self.err("missing ')'"));
                }
                Ok(inner)
            }
            Some(t) => Err(self.err(&format!("unexpected {t:?}"))),
            None => Err(self.err("unexpected end")),
        }
    }
}

pub fn parse_expr(s: &str) -> Result<Expr> {
    let tokens = tokenize(s)?;
    if tokens.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        src: s,
    };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_expr(s)
    }
}

/// f′ and f″ by five-point differences with step 1e−5·(1+r), one-sided
/// when the centered stencil leaves [0, upper].
pub fn finite_difference(f: &dyn Fn(f64) -> f64, r: f64, upper: f64) -> (f64, f64) {
    let h = 1e-5 * (1.0 + r);
    let one_sided = |h: f64| {
        let v: Vec<f64> = (0..5).map(|i| f(r + i as f64 * h)).collect();
        let d1 = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h);
        let d2 = (35.0 * v[0] - 104.0 * v[1] + 114.0 * v[2] - 56.0 * v[3] + 11.0 * v[4])
            / (12.0 * h * h);
        (d1, d2)
    };
    if r - 2.0 * h < 0.0 {
        one_sided(h)
    } else if r + 2.0 * h > upper {
        one_sided(-h)
    } else {
        let (a, b, c, d, e) = (f(r - 2.0 * h), f(r - h), f(r), f(r + h), f(r + 2.0 * h));
        (
            (a - 8.0 * b + 8.0 * d - e) / (12.0 * h),
            (-a + 16.0 * b - 30.0 * c + 16.0 * d - e) / (12.0 * h * h),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_and_evaluates() {
        let e = parse_expr("-log(1-r) + 2*r^2 - exp(r)/3").unwrap();
        let r: f64 = 0.3;
        assert!((e.eval(r) - (-(1.0 - r).ln() + 2.0 * r * r - r.exp() / 3.0)).abs() < 1e-15);
        assert_eq!(parse_expr("2^3^2").unwrap().eval(0.0), 512.0);
        assert_eq!(parse_expr("-2^2").unwrap().eval(0.0), -4.0);
        assert_eq!(parse_expr("1e-3*r").unwrap().eval(2.0), 2e-3);
        assert_eq!(parse_expr("3·r − 1").unwrap().eval(2.0), 5.0);
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "r+", "sin(r)", "(r", "r)", "2 r", "log r", "r$"] {
            assert!(parse_expr(s).is_err(), "{s}");
        }
    }

    #[test]
    fn jet_matches_hand_derivatives() {
        let e = parse_expr("1/(1-r)").unwrap();
        let r: f64 = 0.4;
        let j = e.jet(r);
        let u = 1.0 / (1.0 - r);
        for (k, want) in [
            u,
            u.powi(2),
            2.0 * u.powi(3),
            6.0 * u.powi(4),
            24.0 * u.powi(5),
        ]
        .iter()
        .enumerate()
        {
            assert!((j.derivative(k) - want).abs() < 1e-12 * want, "k = {k}");
        }
        let p = parse_expr("r^3").unwrap().jet(0.0);
        assert_eq!(
            [
                p.derivative(0),
                p.derivative(1),
                p.derivative(2),
                p.derivative(3)
            ],
            [0.0, 0.0, 0.0, 6.0]
        );
        let q = parse_expr("(1+r)^2.5").unwrap().jet(1.0);
        assert!((q.derivative(2) - 2.5 * 1.5 * 2f64.powf(0.5)).abs() < 1e-13);
        let x = parse_expr("r^r").unwrap().jet(2.0);
        assert!((x.derivative(1) - 4.0 * (2f64.ln() + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn finite_differences_one_sided() {
        let f = |r: f64| (1.0 + r).ln();
        let (d1, d2) = finite_difference(&f, 0.0, 1.0);
        assert!((d1 - 1.0).abs() < 1e-8 && (d2 + 1.0).abs() < 1e-4);
        let (d1, _) = finite_difference(&f, 1.0, 1.0);
        assert!((d1 - 0.5).abs() < 1e-8);
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![(0.1f64..3.0).prop_map(Expr::Num), Just(Expr::R)];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
                inner.clone().prop_map(|a| a.exp()),
                inner
                    .clone()
                    .prop_map(|a| (Expr::num(1.0) + a.clone() * a).log()),
                inner
                    .clone()
                    .prop_map(|a| Expr::num(1.0) / (Expr::num(2.0) + a.clone() * a)),
                inner.prop_map(|a| -a),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_round_trips(e in arb_expr(), r in 0.0f64..2.0) {
            let back = parse_expr(&e.to_string()).unwrap();
            let (a, b) = (e.eval(r), back.eval(r));
            if a.is_finite() {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{} vs {}", e, back);
            } else {
                prop_assert!(a == b || (a.is_nan() && b.is_nan()), "{} vs {}", e, back);
            }
        }

        #[test]
        fn jets_agree_with_differences(e in arb_expr(), r in 0.2f64..1.5) {
            let j = e.jet(r);
            prop_assume!(j.0.iter().all(|c| c.is_finite() && c.abs() < 1e6));
            let f = |x: f64| e.eval(x);
            let h = 1e-3;
            let d1 = (f(r - 2.0 * h) - 8.0 * f(r - h) + 8.0 * f(r + h) - f(r + 2.0 * h)) / (12.0 * h);
            prop_assert!((j.derivative(1) - d1).abs() <= 1e-6 * (1.0 + d1.abs()));
        }
    }
}
