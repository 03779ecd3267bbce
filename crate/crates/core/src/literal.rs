//! Text literals for series and Gaussian rationals.
//!
//! A literal is a sum of products of factors, whitespace-insensitive:
//! integers, fractions `a/b`, the imaginary unit `i`, powers `z^k` (k may be
//! negative) and parenthesised sub-expressions, e.g. `1*z^-1 + 2/3*z^0` or
//! `(1/2+3/4*i)*z^2`. Every literal denotes an exact Laurent polynomial.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::gaussian::GaussianRational;
use crate::laurent::LaurentSeries;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based character column in the literal.
    pub column: usize,
    pub token: String,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {} (at `{}`)", self.column, self.message, self.token)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    I,
    Z,
}

struct Lexed {
    toks: Vec<(Tok, usize, String)>,
    len: usize,
}

fn lex(src: &str) -> Result<Lexed, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            toks.push((Tok::Int(text.parse().unwrap()), col, text));
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            'i' => Tok::I,
            'z' => Tok::Z,
            _ => {
                let mut j = i;
                while j < chars.len() && !chars[j].is_whitespace() && !"+-*/^()".contains(chars[j]) {
                    j += 1;
                }
                return Err(ParseError {
                    column: col,
                    token: chars[i..j.max(i + 1)].iter().collect(),
                    message: "unexpected character".into(),
                });
            }
        };
        toks.push((tok, col, c.to_string()));
        i += 1;
    }
    Ok(Lexed { toks, len: chars.len() })
}

struct Parser {
    lexed: Lexed,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.lexed.toks.get(self.pos).map(|t| &t.0)
    }

    fn err(&self, message: &str) -> ParseError {
        match self.lexed.toks.get(self.pos) {
            Some((_, col, text)) => ParseError { column: *col, token: text.clone(), message: message.into() },
            None => ParseError { column: self.lexed.len + 1, token: "<end>".into(), message: message.into() },
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected {what}")))
        }
    }

    fn sum(&mut self) -> Result<LaurentSeries, ParseError> {
        let mut acc = LaurentSeries::zero();
        let mut negate = false;
        if self.peek() == Some(&Tok::Minus) {
            negate = true;
            self.pos += 1;
        } else if self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
        }
        loop {
            let t = self.product()?;
            acc = acc.add(&if negate { t.neg() } else { t });
            match self.peek() {
                Some(Tok::Plus) => negate = false,
                Some(Tok::Minus) => negate = true,
                _ => return Ok(acc),
            }
            self.pos += 1;
        }
    }

    fn product(&mut self) -> Result<LaurentSeries, ParseError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn signed_int(&mut self) -> Result<i64, ParseError> {
        let mut sign = 1;
        let paren = self.peek() == Some(&Tok::LParen);
        if paren {
            self.pos += 1;
        }
        if self.peek() == Some(&Tok::Minus) {
            sign = -1;
            self.pos += 1;
        } else if self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
        }
        let n = match self.peek() {
            Some(Tok::Int(n)) => i64::try_from(n.clone()).map_err(|_| self.err("exponent out of range"))?,
            _ => return Err(self.err("expected an integer exponent")),
        };
        self.pos += 1;
        if paren {
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(sign * n)
    }

    fn factor(&mut self) -> Result<LaurentSeries, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                let mut d = BigInt::from(1);
                if self.peek() == Some(&Tok::Slash) {
                    self.pos += 1;
                    match self.peek().cloned() {
                        Some(Tok::Int(m)) if m != BigInt::from(0) => d = m,
                        Some(Tok::Int(_)) => return Err(self.err("zero denominator")),
                        _ => return Err(self.err("expected a denominator")),
                    }
                    self.pos += 1;
                }
                Ok(LaurentSeries::constant(GaussianRational::real(BigRational::new(n, d))))
            }
            Some(Tok::I) => {
                self.pos += 1;
                Ok(LaurentSeries::constant(GaussianRational::i()))
            }
            Some(Tok::Z) => {
                self.pos += 1;
                let mut e = 1;
                if self.peek() == Some(&Tok::Caret) {
                    self.pos += 1;
                    e = self.signed_int()?;
                }
                Ok(LaurentSeries::z_pow(e))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let s = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(s)
            }
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(self.factor()?.neg())
            }
            _ => Err(self.err("expected a number, `i`, `z` or `(`")),
        }
    }
}

/// Parses a series literal into an exact Laurent polynomial.
pub fn parse_series(src: &str) -> Result<LaurentSeries, ParseError> {
    let lexed = lex(src)?;
    if lexed.toks.is_empty() {
        return Err(ParseError { column: 1, token: "<end>".into(), message: "empty literal".into() });
    }
    let mut p = Parser { lexed, pos: 0 };
    let s = p.sum()?;
    if p.pos != p.lexed.toks.len() {
        return Err(p.err("unexpected token"));
    }
    Ok(s)
}

/// Parses a Gaussian-rational literal such as `3`, `-1/2`, `2/3*i` or `1/2+3/4*i`.
pub fn parse_gaussian(src: &str) -> Result<GaussianRational, ParseError> {
    let s = parse_series(src)?;
    if s.is_exact_zero() {
        return Ok(GaussianRational::zero());
    }
    if s.lead() != Some(0) || s.coeffs().len() != 1 {
        return Err(ParseError {
            column: 1,
            token: src.trim().to_string(),
            message: "expected a constant, found a term in z".into(),
        });
    }
    Ok(s.coeffs()[0].clone())
}

impl FromStr for LaurentSeries {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        parse_series(s)
    }
}

impl FromStr for GaussianRational {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        parse_gaussian(s)
    }
}
