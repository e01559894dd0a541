//! Coefficient functions of time, parsed from a small expression language.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := unary (('*'|'/') unary)*
//! unary  := '-' unary | factor
//! factor := base ('^' unary)?
//! base   := number | 't' | func '(' expr ')' | '(' expr ')'
//! func   := 'sin' | 'cos' | 'exp' | 'tanh'
//! ```

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Tanh,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Tanh => "tanh",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Tanh => x.tanh(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TimeCoefficient {
    Const(f64),
    T,
    Neg(Box<TimeCoefficient>),
    Add(Box<TimeCoefficient>, Box<TimeCoefficient>),
    Sub(Box<TimeCoefficient>, Box<TimeCoefficient>),
    Mul(Box<TimeCoefficient>, Box<TimeCoefficient>),
    Div(Box<TimeCoefficient>, Box<TimeCoefficient>),
    Pow(Box<TimeCoefficient>, Box<TimeCoefficient>),
    Call(Func, Box<TimeCoefficient>),
}

impl TimeCoefficient {
    pub fn constant(v: f64) -> Self {
        TimeCoefficient::Const(v)
    }

    pub fn parse(src: &str) -> Result<Self> {
        Parser::new(src).parse()
    }

    /// `a · self`, used for amplitude sweeps.
    pub fn scaled(&self, a: f64) -> Self {
        TimeCoefficient::Mul(Box::new(TimeCoefficient::Const(a)), Box::new(self.clone()))
    }

    pub fn is_constant(&self) -> bool {
        use TimeCoefficient::*;
        match self {
            Const(_) => true,
            T => false,
            Neg(a) | Call(_, a) => a.is_constant(),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Pow(a, b) => a.is_constant() && b.is_constant(),
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        use TimeCoefficient::*;
        let v = match self {
            Const(c) => *c,
            T => t,
            Neg(a) => -a.eval(t)?,
            Add(a, b) => a.eval(t)? + b.eval(t)?,
            Sub(a, b) => a.eval(t)? - b.eval(t)?,
            Mul(a, b) => a.eval(t)? * b.eval(t)?,
            Div(a, b) => {
                let d = b.eval(t)?;
                if d == 0.0 {
                    return Err(Error::Singular(format!("division by zero in `{self}` at t = {t}")));
                }
                a.eval(t)? / d
            }
            Pow(a, b) => {
                let base = a.eval(t)?;
                let e = b.eval(t)?;
                if base < 0.0 && e.fract() != 0.0 {
                    return Err(Error::Singular(format!(
                        "non-integer power of negative base in `{self}` at t = {t}"
                    )));
                }
                if base == 0.0 && e < 0.0 {
                    return Err(Error::Singular(format!(
                        "zero to a negative power in `{self}` at t = {t}"
                    )));
                }
                base.powf(e)
            }
            Call(f, a) => f.apply(a.eval(t)?),
        };
        if !v.is_finite() {
            return Err(Error::Singular(format!("non-finite value of `{self}` at t = {t}")));
        }
        Ok(v)
    }
}

impl FromStr for TimeCoefficient {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for TimeCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use TimeCoefficient::*;
        match self {
            Const(c) => write!(f, "{c}"),
            T => write!(f, "t"),
            Neg(a) => write!(f, "(-{a})"),
            Add(a, b) => write!(f, "({a} + {b})"),
            Sub(a, b) => write!(f, "({a} - {b})"),
            Mul(a, b) => write!(f, "({a} * {b})"),
            Div(a, b) => write!(f, "({a} / {b})"),
            Pow(a, b) => write!(f, "({a} ^ {b})"),
            Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src: src.as_bytes(),
            pos: 0,
            depth: 0,
        }
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> Error {
        let before = &self.src[..pos.min(self.src.len())];
        let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
        let line_start = before.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        Error::Parse {
            line,
            column: pos - line_start + 1,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<TimeCoefficient> {
        if self.peek().is_none() {
            return Err(self.error_at(self.pos, "empty expression"));
        }
        let e = self.expr()?;
        if let Some(c) = self.peek() {
            let msg = if c == b')' {
                "unmatched ')'".to_string()
            } else {
                format!("unexpected '{}'", c as char)
            };
            return Err(self.error_at(self.pos, msg));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<TimeCoefficient> {
        let mut lhs = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == b'+' {
                TimeCoefficient::Add(Box::new(lhs), Box::new(rhs))
            } else {
                TimeCoefficient::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<TimeCoefficient> {
        let mut lhs = self.unary()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == b'*' {
                TimeCoefficient::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                TimeCoefficient::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<TimeCoefficient> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(TimeCoefficient::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<TimeCoefficient> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(TimeCoefficient::Neg(Box::new(inner)));
        }
        self.factor()
    }

    fn expect_close(&mut self) -> Result<()> {
        if self.peek() == Some(b')') {
            self.pos += 1;
            self.depth -= 1;
            Ok(())
        } else {
            Err(self.error_at(self.pos, "expected ')'"))
        }
    }

    fn base(&mut self) -> Result<TimeCoefficient> {
        let start = self.pos;
        match self.peek() {
            None => {
                let msg = if self.depth > 0 {
                    "expected ')'"
                } else {
                    "expected expression"
                };
                Err(self.error_at(self.pos, msg))
            }
            Some(b'(') => {
                self.pos += 1;
                self.depth += 1;
                let e = self.expr()?;
                self.expect_close()?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                let func = match ident {
                    "t" => return Ok(TimeCoefficient::T),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    "tanh" => Func::Tanh,
                    _ => return Err(self.error_at(start, format!("unknown identifier '{ident}'"))),
                };
                if self.peek() != Some(b'(') {
                    return Err(self.error_at(self.pos, "expected '('"));
                }
                self.pos += 1;
                self.depth += 1;
                let arg = self.expr()?;
                self.expect_close()?;
                Ok(TimeCoefficient::Call(func, Box::new(arg)))
            }
            Some(c) => Err(self.error_at(start.max(self.pos), format!("unexpected '{}'", c as char))),
        }
    }

    fn number(&mut self) -> Result<TimeCoefficient> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(self.error_at(start, "malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<f64>()
            .map(TimeCoefficient::Const)
            .map_err(|_| self.error_at(start, "malformed number"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(s: &str, t: f64) -> f64 {
        TimeCoefficient::parse(s).unwrap().eval(t).unwrap()
    }

    #[test]
    fn evaluates_examples() {
        assert_eq!(eval("1", 5.0), 1.0);
        assert_eq!(eval("1 + 0.1*sin(2*t)", 0.0), 1.0);
        assert_eq!(eval("2^3^2", 0.0), 512.0);
        assert_eq!(eval("1 - 2 - 3", 0.0), -4.0);
        assert_eq!(eval("8/2/2", 0.0), 2.0);
        assert_eq!(eval("-t^2", 3.0), -9.0);
        assert!((eval("tanh(t) + exp(0) * cos(t)", 0.5) - (0.5f64.tanh() + 0.5f64.cos())).abs() < 1e-15);
        assert_eq!(eval("1.5e1", 0.0), 15.0);
    }

    #[test]
    fn singular_inputs_error() {
        let e = TimeCoefficient::parse("1/t").unwrap();
        assert!(matches!(e.eval(0.0), Err(Error::Singular(_))));
        let e = TimeCoefficient::parse("(t-1)^0.5").unwrap();
        assert!(matches!(e.eval(0.0), Err(Error::Singular(_))));
        assert_eq!(e.eval(5.0).unwrap(), 2.0);
        let e = TimeCoefficient::parse("exp(t)").unwrap();
        assert!(matches!(e.eval(1e6), Err(Error::Singular(_))));
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = TimeCoefficient::parse("sin(").unwrap_err();
        assert_eq!(err.to_string(), "expected ')' at 1:5");
        let err = TimeCoefficient::parse("1 + foo").unwrap_err();
        assert_eq!(err.to_string(), "unknown identifier 'foo' at 1:5");
        let err = TimeCoefficient::parse("1 +").unwrap_err();
        assert_eq!(err.to_string(), "expected expression at 1:4");
        let err = TimeCoefficient::parse("(1 + t").unwrap_err();
        assert_eq!(err.to_string(), "expected ')' at 1:7");
        let err = TimeCoefficient::parse("1\n+ *").unwrap_err();
        assert_eq!(err.to_string(), "unexpected '*' at 2:3");
        assert!(TimeCoefficient::parse("").is_err());
        assert!(TimeCoefficient::parse("1)").is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["1+0.1*sin(t)", "2^(t/3)", "-cos(t)*exp(-t)", "tanh(1-t)/(1+t^2)"] {
            let e = TimeCoefficient::parse(s).unwrap();
            let again = TimeCoefficient::parse(&e.to_string()).unwrap();
            for t in [0.0, 0.3, 1.7] {
                assert_eq!(e.eval(t).unwrap(), again.eval(t).unwrap());
            }
        }
    }

    #[test]
    fn constant_detection() {
        assert!(TimeCoefficient::parse("2*sin(1)").unwrap().is_constant());
        assert!(!TimeCoefficient::parse("2*sin(t)").unwrap().is_constant());
    }
}
