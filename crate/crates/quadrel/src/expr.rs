//! Tiny expression language for integrands given on the command line:
//! arithmetic with parentheses, the variable `x`, constants `pi` and `e`, and
//! the functions sin cos exp log sqrt atan sinh cosh. `^` is right-associative
//! power.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Unary(UnaryFn, Box<Expr>),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryFn {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Atan,
    Sinh,
    Cosh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser {
            chars: src.chars().collect(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(Error::Expr(format!(
                "unexpected input at position {}",
                p.pos
            )));
        }
        Ok(e)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var => x,
            Expr::Neg(e) => -e.eval(x),
            Expr::Unary(f, e) => {
                let v = e.eval(x);
                match f {
                    UnaryFn::Sin => v.sin(),
                    UnaryFn::Cos => v.cos(),
                    UnaryFn::Exp => v.exp(),
                    UnaryFn::Log => v.ln(),
                    UnaryFn::Sqrt => v.sqrt(),
                    UnaryFn::Atan => v.atan(),
                    UnaryFn::Sinh => v.sinh(),
                    UnaryFn::Cosh => v.cosh(),
                }
            }
            Expr::Bin(op, l, r) => {
                let (a, b) = (l.eval(x), r.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
        }
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.bump();
                    lhs = Expr::Bin(BinOp::Add, lhs.into(), self.term()?.into());
                }
                Some('-') => {
                    self.bump();
                    lhs = Expr::Bin(BinOp::Sub, lhs.into(), self.term()?.into());
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.bump();
                    lhs = Expr::Bin(BinOp::Mul, lhs.into(), self.factor()?.into());
                }
                Some('/') => {
                    self.bump();
                    lhs = Expr::Bin(BinOp::Div, lhs.into(), self.factor()?.into());
                }
                _ => return Ok(lhs),
            }
        }
    }

    // unary minus binds looser than `^`, so -x^2 is -(x^2)
    fn factor(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('-') => {
                self.bump();
                Ok(Expr::Neg(self.factor()?.into()))
            }
            Some('+') => {
                self.bump();
                self.factor()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek() == Some('^') {
            self.bump();
            let exp = self.factor()?; // right-associative
            return Ok(Expr::Bin(BinOp::Pow, base.into(), exp.into()));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('(') => {
                self.bump();
                let e = self.expr()?;
                if self.bump() != Some(')') {
                    return Err(Error::Expr("missing closing parenthesis".into()));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            other => Err(Error::Expr(format!("unexpected token {other:?}"))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_ascii_digit() || self.chars[self.pos] == '.')
        {
            self.pos += 1;
        }
        // scientific suffix
        if self.pos < self.chars.len() && matches!(self.chars[self.pos], 'e' | 'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.chars.len() && matches!(self.chars[self.pos], '+' | '-') {
                self.pos += 1;
            }
            if self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = mark; // bare `e` is the Euler constant
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| Error::Expr(format!("bad number literal `{text}`")))
    }

    fn ident(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        match name.as_str() {
            "x" => Ok(Expr::Var),
            "pi" => Ok(Expr::Num(std::f64::consts::PI)),
            "e" => Ok(Expr::Num(std::f64::consts::E)),
            "sin" | "cos" | "exp" | "log" | "sqrt" | "atan" | "sinh" | "cosh" => {
                if self.bump() != Some('(') {
                    return Err(Error::Expr(format!("`{name}` needs an argument list")));
                }
                let arg = self.expr()?;
                if self.bump() != Some(')') {
                    return Err(Error::Expr("missing closing parenthesis".into()));
                }
                let f = match name.as_str() {
                    "sin" => UnaryFn::Sin,
                    "cos" => UnaryFn::Cos,
                    "exp" => UnaryFn::Exp,
                    "log" => UnaryFn::Log,
                    "sqrt" => UnaryFn::Sqrt,
                    "atan" => UnaryFn::Atan,
                    "sinh" => UnaryFn::Sinh,
                    _ => UnaryFn::Cosh,
                };
                Ok(Expr::Unary(f, arg.into()))
            }
            _ => Err(Error::Expr(format!("unknown identifier `{name}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, x: f64) -> f64 {
        Expr::parse(src).unwrap().eval(x)
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(ev("1 + 2 * 3", 0.0), 7.0);
        assert_eq!(ev("(1 + 2) * 3", 0.0), 9.0);
        assert_eq!(ev("2 ^ 3 ^ 2", 0.0), 512.0);
        assert_eq!(ev("-x^2", 3.0), -9.0);
        assert_eq!(ev("6 / 3 / 2", 0.0), 1.0);
    }

    #[test]
    fn functions_and_constants() {
        assert!((ev("sin(pi / 2)", 0.0) - 1.0).abs() < 1e-15);
        assert!((ev("exp(1) - e", 0.0)).abs() < 1e-15);
        assert!((ev("exp(x + 1) * cos(2 * x)", 0.3) - (1.3f64).exp() * (0.6f64).cos()).abs() < 1e-14);
        assert!((ev("2 * e * sinh(x) * sin(10 * x)", 0.5)
            - 2.0 * std::f64::consts::E * 0.5f64.sinh() * 5.0f64.sin())
        .abs()
            < 1e-14);
        assert!((ev("1e-3 + 2E2", 0.0) - 200.001).abs() < 1e-12);
        assert!((ev("log(sqrt(e))", 0.0) - 0.5).abs() < 1e-14);
        assert!((ev("atan(1) * 4 - pi", 0.0)).abs() < 1e-14);
    }

    #[test]
    fn parse_errors() {
        assert!(Expr::parse("2 +").is_err());
        assert!(Expr::parse("sin x").is_err());
        assert!(Expr::parse("(1 + 2").is_err());
        assert!(Expr::parse("foo(3)").is_err());
        assert!(Expr::parse("1 2").is_err());
    }
}
