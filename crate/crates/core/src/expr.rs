//! A tiny expression grammar shared by the CLI and the parsers:
//! integer literals, `+`, `-`, `*`, `^` with a non-negative integer exponent,
//! parentheses, and identifiers such as `x`, `y`, `eps`, `q`, `x1`, `y2`.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::mpoly::{MPoly, Var};
use crate::rings::UPoly;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(BigInt),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

/// Something an [`Expr`] can be evaluated into.
pub trait ExprTarget {
    type Value;

    fn int(&self, k: &BigInt) -> Result<Self::Value>;
    fn var(&self, name: &str) -> Result<Self::Value>;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn neg(&self, a: &Self::Value) -> Result<Self::Value>;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn pow(&self, a: &Self::Value, e: u32) -> Result<Self::Value>;

    fn sub(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value> {
        self.add(a, &self.neg(b)?)
    }
}

impl Expr {
    pub fn parse(s: &str) -> Result<Expr> {
        let tokens = tokenize(s)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Parse(format!(
                "unexpected {:?} in {s:?}",
                p.tokens[p.pos]
            )));
        }
        Ok(e)
    }

    pub fn eval<T: ExprTarget>(&self, t: &T) -> Result<T::Value> {
        match self {
            Expr::Int(k) => t.int(k),
            Expr::Var(v) => t.var(v),
            Expr::Add(a, b) => t.add(&a.eval(t)?, &b.eval(t)?),
            Expr::Sub(a, b) => t.sub(&a.eval(t)?, &b.eval(t)?),
            Expr::Neg(a) => t.neg(&a.eval(t)?),
            Expr::Mul(a, b) => t.mul(&a.eval(t)?, &b.eval(t)?),
            Expr::Pow(a, e) => t.pow(&a.eval(t)?, *e),
        }
    }

    pub fn to_mpoly(&self) -> Result<MPoly> {
        self.eval(&MPolyTarget)
    }

    pub fn to_upoly(&self) -> Result<UPoly> {
        self.eval(&UPolyTarget)
    }
}

struct MPolyTarget;

impl ExprTarget for MPolyTarget {
    type Value = MPoly;

    fn int(&self, k: &BigInt) -> Result<MPoly> {
        Ok(MPoly::constant(k.clone()))
    }
    fn var(&self, name: &str) -> Result<MPoly> {
        Ok(MPoly::var(name.parse::<Var>()?))
    }
    fn add(&self, a: &MPoly, b: &MPoly) -> Result<MPoly> {
        Ok(a.add(b))
    }
    fn neg(&self, a: &MPoly) -> Result<MPoly> {
        Ok(a.neg())
    }
    fn mul(&self, a: &MPoly, b: &MPoly) -> Result<MPoly> {
        Ok(a.mul(b))
    }
    fn pow(&self, a: &MPoly, e: u32) -> Result<MPoly> {
        Ok(a.pow(e))
    }
}

struct UPolyTarget;

impl ExprTarget for UPolyTarget {
    type Value = UPoly;

    fn int(&self, k: &BigInt) -> Result<UPoly> {
        Ok(UPoly::constant(k.clone()))
    }
    fn var(&self, name: &str) -> Result<UPoly> {
        match name {
            "q" | "Q" => Ok(UPoly::q()),
            _ => Err(Error::Parse(format!(
                "only q may appear here, found {name:?}"
            ))),
        }
    }
    fn add(&self, a: &UPoly, b: &UPoly) -> Result<UPoly> {
        Ok(a.add(b))
    }
    fn neg(&self, a: &UPoly) -> Result<UPoly> {
        Ok(a.neg())
    }
    fn mul(&self, a: &UPoly, b: &UPoly) -> Result<UPoly> {
        Ok(a.mul(b))
    }
    fn pow(&self, a: &UPoly, e: u32) -> Result<UPoly> {
        Ok(a.pow(e))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Int(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let lit: String = chars[start..i].iter().collect();
            out.push(Token::Int(lit.parse().expect("digits parse")));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*^()".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else if c == '\u{2212}' {
            out.push(Token::Op('-'));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?} in {s:?}")));
        }
    }
    if out.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while self.peek_op() == Some('*') {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            match self.tokens.get(self.pos) {
                Some(Token::Int(k)) => {
                    let e: u32 = k
                        .try_into()
                        .map_err(|_| Error::Parse(format!("exponent {k} too large")))?;
                    self.pos += 1;
                    return Ok(Expr::Pow(Box::new(base), e));
                }
                other => {
                    return Err(Error::Parse(format!(
                        "expected an exponent, found {other:?}"
                    )))
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        match tok {
            Some(Token::Int(k)) => Ok(Expr::Int(k)),
            Some(Token::Ident(v)) => Ok(Expr::Var(v)),
            Some(Token::Op('(')) => {
                let e = self.expr()?;
                if self.peek_op() != Some(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                self.pos += 1;
                Ok(e)
            }
            other => Err(Error::Parse(format!("unexpected {other:?}"))),
        }
    }
}
