//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary ('*' unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' integer)*
//! atom    := number ['i'] | 'i' | 'pi' | zK | func '(' sum ')' | '(' sum ')'
//! func    := exp | sin | cos | sinh | cosh
//! ```
//!
//! `w` is accepted as a synonym of `z1` when the dimension is 1.

use thiserror::Error;

use super::Expr;
use crate::cxjet::{Cx, I};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("exponent at position {pos} must be a non-negative integer")]
    BadExponent { pos: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UnknownIdentifier { pos, .. }
            | ParseError::BadExponent { pos } => *pos,
        }
    }
}

pub fn parse_expr(text: &str, n: usize) -> Result<Expr, ParseError> {
    parse_with(text, n, n == 1)
}

/// Dimension bound used when expressions are read from spec files; the
/// actual arity is checked later by whoever consumes the expression.
pub(crate) const SERDE_MAX_DIM: usize = 64;

/// Parser for serialized expressions: any `zK` up to [`SERDE_MAX_DIM`] and
/// `w` as a synonym of `z1`.
pub(crate) fn parse_serialized(text: &str) -> Result<Expr, ParseError> {
    parse_with(text, SERDE_MAX_DIM, true)
}

fn parse_with(text: &str, n: usize, allow_w: bool) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        dim: n,
        allow_w,
    };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
    allow_w: bool,
}

fn fold_add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        (a, b) => a + b,
    }
}

fn fold_neg(a: Expr) -> Expr {
    match a {
        Expr::Const(x) => Expr::Const(-x),
        a => -a,
    }
}

impl<'a> Parser<'a> {
    fn syntax(&self, msg: &str) -> ParseError {
        ParseError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
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

    fn eat(&mut self, ch: u8) -> bool {
        if self.peek() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.product()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.product()?;
                acc = fold_add(acc, rhs);
            } else if self.eat(b'-') {
                let rhs = self.product()?;
                acc = fold_add(acc, fold_neg(rhs));
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        while self.eat(b'*') {
            let rhs = self.unary()?;
            acc = acc * rhs;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            Ok(fold_neg(self.unary()?))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.atom()?;
        while self.eat(b'^') {
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let digits = &self.src[start..self.pos];
            let next = self.src.get(self.pos).copied();
            if digits.is_empty() || matches!(next, Some(b'.') | Some(b'e') | Some(b'E')) {
                return Err(ParseError::BadExponent { pos: start });
            }
            let k: u32 = std::str::from_utf8(digits)
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or(ParseError::BadExponent { pos: start })?;
            base = base.pow(k);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(_) => Err(self.syntax("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let s = self.src;
        let digits = |p: &mut usize| {
            while *p < s.len() && s[*p].is_ascii_digit() {
                *p += 1;
            }
        };
        digits(&mut self.pos);
        if self.pos < s.len() && s[self.pos] == b'.' {
            self.pos += 1;
            digits(&mut self.pos);
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let mut q = self.pos + 1;
            if q < s.len() && (s[q] == b'+' || s[q] == b'-') {
                q += 1;
            }
            if q < s.len() && s[q].is_ascii_digit() {
                self.pos = q;
                digits(&mut self.pos);
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).unwrap_or("");
        let x: f64 = text.parse().map_err(|_| ParseError::Syntax {
            pos: start,
            msg: format!("malformed number `{text}`"),
        })?;
        let imaginary = self.pos < s.len()
            && s[self.pos] == b'i'
            && !s
                .get(self.pos + 1)
                .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_');
        if imaginary {
            self.pos += 1;
            Ok(Expr::Const(Cx::new(0.0, x)))
        } else {
            Ok(Expr::Const(Cx::new(x, 0.0)))
        }
    }

    fn ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        let unknown = || ParseError::UnknownIdentifier {
            pos: start,
            name: name.to_string(),
        };
        let func: Option<fn(Expr) -> Expr> = match name {
            "exp" => Some(Expr::exp),
            "sin" => Some(Expr::sin),
            "cos" => Some(Expr::cos),
            "sinh" => Some(Expr::sinh),
            "cosh" => Some(Expr::cosh),
            _ => None,
        };
        if let Some(f) = func {
            if !self.eat(b'(') {
                return Err(self.syntax("expected `(` after function name"));
            }
            let arg = self.sum()?;
            if !self.eat(b')') {
                return Err(self.syntax("expected `)`"));
            }
            return Ok(f(arg));
        }
        match name {
            "i" => Ok(Expr::Const(I)),
            "pi" => Ok(Expr::real(std::f64::consts::PI)),
            "w" if self.allow_w => Ok(Expr::Var(0)),
            _ => {
                let idx = name
                    .strip_prefix('z')
                    .filter(|d| !d.is_empty() && !d.starts_with('0'))
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(unknown)?;
                if idx > self.dim {
                    return Err(unknown());
                }
                Ok(Expr::Var(idx - 1))
            }
        }
    }
}
