//! Arithmetic expressions for config-defined systems.
//!
//! Grammar:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'pi' | func '(' expr ')' | var '[' int ']' | '(' expr ')'
//! func  := sin | cos | tan | exp | ln | sqrt | sinc | cosc
//! var   := Q | f | a
//! ```
//!
//! Expressions are parsed once and evaluated for any [`Scalar`], so dual
//! numbers differentiate them exactly.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    Q,
    F,
    A,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Sinc,
    Cosc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var, usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Variable bindings for evaluation.
pub struct Env<'a, T> {
    pub q: &'a [T],
    pub f: &'a [T],
    pub a: &'a [T],
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser { src, tokens: tokenize(src)?, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval<T: Scalar>(&self, env: &Env<T>) -> T {
        match self {
            Expr::Num(x) => T::from_f64(*x),
            Expr::Var(v, i) => match v {
                Var::Q => env.q[*i],
                Var::F => env.f[*i],
                Var::A => env.a[*i],
            },
            Expr::Neg(e) => -e.eval(env),
            Expr::Bin(op, l, r) => {
                let (l, r) = (l.eval(env), r.eval(env));
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => l / r,
                }
            }
            Expr::Pow(base, exp) => {
                let b = base.eval(env);
                match **exp {
                    Expr::Num(n) if n.fract() == 0.0 && n.abs() <= i32::MAX as f64 => b.powi(n as i32),
                    _ => b.powf(exp.eval(env)),
                }
            }
            Expr::Call(func, e) => {
                let x = e.eval(env);
                match func {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Exp => x.exp(),
                    Func::Ln => x.ln(),
                    Func::Sqrt => x.sqrt(),
                    Func::Sinc => x.sinc(),
                    Func::Cosc => x.cosc(),
                }
            }
        }
    }

    /// Largest index used for `var`, if any.
    pub fn max_index(&self, var: Var) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(v, i) => (*v == var).then_some(*i),
            Expr::Neg(e) | Expr::Call(_, e) => e.max_index(var),
            Expr::Bin(_, l, r) | Expr::Pow(l, r) => match (l.max_index(var), r.max_index(var)) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    /// Fail unless every variable index is below its declared length.
    pub fn check_bounds(&self, q: usize, f: usize, a: usize) -> Result<()> {
        for (var, len, name) in [(Var::Q, q, "Q"), (Var::F, f, "f"), (Var::A, a, "a")] {
            if let Some(i) = self.max_index(var) {
                if i >= len {
                    return Err(Error::Expression(format!(
                        "{name}[{i}] out of range (only {len} available) in '{self}'"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Var(v, i) => {
                let n = match v {
                    Var::Q => "Q",
                    Var::F => "f",
                    Var::A => "a",
                };
                write!(f, "{n}[{i}]")
            }
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, l, r) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                };
                write!(f, "({l} {s} {r})")
            }
            Expr::Pow(b, e) => write!(f, "({b}^{e})"),
            Expr::Call(func, e) => write!(f, "{}({e})", format!("{func:?}").to_lowercase()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                i += 1;
            }
            if i < chars.len() && matches!(chars[i].1, 'e' | 'E') {
                let mut j = i + 1;
                if j < chars.len() && matches!(chars[j].1, '+' | '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].1.is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].1.is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let end = chars.get(i).map_or(src.len(), |c| c.0);
            let text = &src[pos..end];
            let v: f64 = text
                .parse()
                .map_err(|_| Error::Expression(format!("bad number '{text}' at {pos} in '{src}'")))?;
            out.push((pos, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = pos;
            while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            let end = chars.get(i).map_or(src.len(), |c| c.0);
            out.push((start, Tok::Ident(src[start..end].to_string())));
        } else if "+-*/^()[]".contains(c) {
            out.push((pos, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(Error::Expression(format!("unexpected character '{c}' at {pos} in '{src}'")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        let at = self.tokens.get(self.pos).map_or(self.src.len(), |t| t.0);
        Error::Expression(format!("{msg} at {at} in '{}'", self.src))
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.1)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{c}'")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let var = match name.as_str() {
                    "Q" => Some(Var::Q),
                    "f" => Some(Var::F),
                    "a" => Some(Var::A),
                    _ => None,
                };
                if let Some(var) = var {
                    self.expect('[')?;
                    let idx = match self.peek() {
                        Some(Tok::Num(v)) if v.fract() == 0.0 && *v >= 0.0 => *v as usize,
                        _ => return Err(self.error("expected a non-negative integer index")),
                    };
                    self.pos += 1;
                    self.expect(']')?;
                    return Ok(Expr::Var(var, idx));
                }
                if name == "pi" {
                    return Ok(Expr::Num(std::f64::consts::PI));
                }
                let func = match name.as_str() {
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "tan" => Func::Tan,
                    "exp" => Func::Exp,
                    "ln" => Func::Ln,
                    "sqrt" => Func::Sqrt,
                    "sinc" => Func::Sinc,
                    "cosc" => Func::Cosc,
                    _ => {
                        self.pos -= 1;
                        return Err(self.error(&format!("unknown identifier '{name}'")));
                    }
                };
                self.expect('(')?;
                let arg = self.expr()?;
                self.expect(')')?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            _ => Err(self.error("expected an operand")),
        }
    }
}
