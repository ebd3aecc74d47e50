//! Polynomial text grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' unary) | ('/' integer))*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | identifier | '(' expr ')'
//! ```
//!
//! Juxtaposition is not multiplication: `2x1` is a syntax error, write `2*x1`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use super::{Polynomial, Rational, VarContext};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at offset {pos}")]
    UnknownVariable { name: String, pos: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
}

fn tokenize(s: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
                return Err(ParseError::Syntax {
                    pos: i,
                    msg: "implicit multiplication is not allowed; use `*`".into(),
                });
            }
            out.push((Tok::Int(s[start..i].parse().unwrap()), start));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(s[start..i].to_string()), start));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Sym(c), i));
            i += 1;
        } else {
            return Err(ParseError::Syntax { pos: i, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    ctx: &'a VarContext,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { pos: self.offset(), msg: msg.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc + self.term()?;
            } else if self.eat('-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc * self.unary()?;
            } else if self.eat('/') {
                match self.peek().cloned() {
                    Some(Tok::Int(n)) => {
                        if n.is_zero() {
                            return self.err("division by zero");
                        }
                        self.pos += 1;
                        acc = acc.scale(&Rational::new(BigInt::one(), n));
                    }
                    _ => return self.err("expected an integer after `/`"),
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial, ParseError> {
        if self.eat('-') {
            Ok(-self.unary()?)
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Polynomial, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            match self.peek().cloned() {
                Some(Tok::Int(n)) => {
                    let Ok(e) = u32::try_from(&n) else {
                        return self.err("exponent too large");
                    };
                    self.pos += 1;
                    Ok(base.pow(e))
                }
                _ => self.err("expected a non-negative integer exponent"),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Polynomial, ParseError> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Polynomial::constant(self.ctx, Rational::from_integer(n)))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match self.ctx.index_of(&name) {
                    Some(i) => Ok(Polynomial::var(self.ctx, i)),
                    None => Err(ParseError::UnknownVariable { name, pos: at }),
                }
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(inner)
            }
            Some(_) => self.err("expected a number, variable or `(`"),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parse `text` into a canonical polynomial over `ctx`.
pub fn parse_poly(text: &str, ctx: &VarContext) -> Result<Polynomial, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), ctx };
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(out)
}
