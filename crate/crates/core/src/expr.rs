//! Tiny expression language for coefficient profiles given as strings of `x`.
//!
//! Expressions are evaluated with forward-mode dual numbers, so every parsed
//! coefficient comes with an exact first derivative.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("unexpected character '{0}' at offset {1}")]
    UnexpectedChar(char, usize),
    #[error("unexpected end of expression")]
    UnexpectedEnd,
    #[error("unknown function '{0}'")]
    UnknownFunction(String),
    #[error("unknown identifier '{0}' (only `x`, `pi` and `e` are defined)")]
    UnknownIdentifier(String),
    #[error("trailing input at offset {0}")]
    Trailing(usize),
    #[error("invalid number literal '{0}'")]
    BadNumber(String),
}

/// Value together with its derivative with respect to `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    pub const fn constant(v: f64) -> Self {
        Self { v, d: 0.0 }
    }

    pub const fn variable(v: f64) -> Self {
        Self { v, d: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Self::Exp,
            "ln" | "log" => Self::Ln,
            "sqrt" => Self::Sqrt,
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "tan" => Self::Tan,
            "sinh" => Self::Sinh,
            "cosh" => Self::Cosh,
            "tanh" => Self::Tanh,
            "abs" => Self::Abs,
            _ => return None,
        })
    }

    fn apply(self, a: Dual) -> Dual {
        let (v, dv) = match self {
            Self::Exp => {
                let e = a.v.exp();
                (e, e)
            }
            Self::Ln => (a.v.ln(), 1.0 / a.v),
            Self::Sqrt => {
                let s = a.v.sqrt();
                (s, 0.5 / s)
            }
            Self::Sin => (a.v.sin(), a.v.cos()),
            Self::Cos => (a.v.cos(), -a.v.sin()),
            Self::Tan => {
                let t = a.v.tan();
                (t, 1.0 + t * t)
            }
            Self::Sinh => (a.v.sinh(), a.v.cosh()),
            Self::Cosh => (a.v.cosh(), a.v.sinh()),
            Self::Tanh => {
                let t = a.v.tanh();
                (t, 1.0 - t * t)
            }
            Self::Abs => (a.v.abs(), if a.v < 0.0 { -1.0 } else { 1.0 }),
        };
        Dual { v, d: dv * a.d }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    X,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval(&self, x: Dual) -> Dual {
        match self {
            Node::Num(c) => Dual::constant(*c),
            Node::X => x,
            Node::Neg(a) => {
                let a = a.eval(x);
                Dual { v: -a.v, d: -a.d }
            }
            Node::Add(a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                Dual { v: a.v + b.v, d: a.d + b.d }
            }
            Node::Sub(a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                Dual { v: a.v - b.v, d: a.d - b.d }
            }
            Node::Mul(a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                Dual { v: a.v * b.v, d: a.d * b.v + a.v * b.d }
            }
            Node::Div(a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                Dual { v: a.v / b.v, d: (a.d * b.v - a.v * b.d) / (b.v * b.v) }
            }
            Node::Pow(a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                let v = a.v.powf(b.v);
                // constant exponents keep negative bases usable, e.g. (x-1)^2
                let d = if b.d == 0.0 {
                    if b.v == 0.0 {
                        0.0
                    } else {
                        b.v * a.v.powf(b.v - 1.0) * a.d
                    }
                } else {
                    v * (b.d * a.v.ln() + b.v * a.d / a.v)
                };
                Dual { v, d }
            }
            Node::Call(f, a) => f.apply(a.eval(x)),
        }
    }
}

/// A parsed expression in the single variable `x`.
#[derive(Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.source)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        let mut p = Parser { src: source.as_bytes(), pos: 0 };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(ParseError::Trailing(p.pos));
        }
        Ok(Self { source: source.trim().to_string(), root })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.root.eval(Dual::constant(x)).v
    }

    /// Value and first derivative at `x`.
    pub fn eval_dual(&self, x: f64) -> Dual {
        self.root.eval(Dual::variable(x))
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if c == b'+' {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if c == b'*' {
                Node::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    // right associative, binds tighter than unary minus: -x^2 == -(x^2)
    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let c = self.peek().ok_or(ParseError::UnexpectedEnd)?;
        if c == b'(' {
            self.pos += 1;
            let inner = self.expr()?;
            return match self.peek() {
                Some(b')') => {
                    self.pos += 1;
                    Ok(inner)
                }
                Some(other) => Err(ParseError::UnexpectedChar(other as char, self.pos)),
                None => Err(ParseError::UnexpectedEnd),
            };
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
            if self.peek() == Some(b'(') {
                let func = Func::from_name(name)
                    .ok_or_else(|| ParseError::UnknownFunction(name.to_string()))?;
                self.pos += 1;
                let arg = self.expr()?;
                return match self.peek() {
                    Some(b')') => {
                        self.pos += 1;
                        Ok(Node::Call(func, Box::new(arg)))
                    }
                    Some(other) => Err(ParseError::UnexpectedChar(other as char, self.pos)),
                    None => Err(ParseError::UnexpectedEnd),
                };
            }
            return match name {
                "x" => Ok(Node::X),
                "pi" => Ok(Node::Num(std::f64::consts::PI)),
                "e" => Ok(Node::Num(std::f64::consts::E)),
                _ => Err(ParseError::UnknownIdentifier(name.to_string())),
            };
        }
        Err(ParseError::UnexpectedChar(c as char, self.pos))
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let bytes = self.src;
        while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.')
        {
            self.pos += 1;
        }
        if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < bytes.len() && (bytes[self.pos] == b'+' || bytes[self.pos] == b'-') {
                self.pos += 1;
            }
            if self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // `2e` is not an exponent; leave the `e` for the caller
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&bytes[start..self.pos]).unwrap_or_default();
        text.parse::<f64>()
            .map(Node::Num)
            .map_err(|_| ParseError::BadNumber(text.to_string()))
    }
}
