//! Recursive-descent parser for the symbol expression grammar:
//!
//! ```text
//! expr   := ('-' | '+')? term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := base ('^' uint)?
//! base   := rational | decimal | 'i' | 'hbar' | var | '(' expr ')'
//! var    := ('q' | 'p') uint?          -- unindexed allowed when n = 1
//! ```
//!
//! Numbers are parsed exactly: `2/3` is the rational two thirds and
//! decimals such as `0.125` become exact rationals. Errors carry their
//! byte offset in the input.

use crate::error::{Error, Result};
use crate::symbol::Symbol;
use crate::{Coeff, Rational};
use num_bigint::BigInt;
use num_traits::{One, Zero};

pub fn parse_symbol(text: &str, n: usize) -> Result<Symbol> {
    let mut p = Parser {
        input: text.as_bytes(),
        pos: 0,
        n,
    };
    p.skip_ws();
    let sym = p.parse_expr()?;
    p.skip_ws();
    if p.pos != p.input.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(sym)
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
    n: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ') | Some(b'\t')) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_expr(&mut self) -> Result<Symbol> {
        self.skip_ws();
        let negate = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let mut acc = self.parse_term()?;
        if negate {
            acc = acc.neg();
        }
        loop {
            self.skip_ws();
            if self.eat(b'+') {
                let t = self.parse_term()?;
                acc = acc.add(&t)?;
            } else if self.eat(b'-') {
                let t = self.parse_term()?;
                acc = acc.sub(&t)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_term(&mut self) -> Result<Symbol> {
        let mut acc = self.parse_factor()?;
        loop {
            self.skip_ws();
            if self.eat(b'*') {
                let f = self.parse_factor()?;
                acc = acc.mul(&f)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_factor(&mut self) -> Result<Symbol> {
        let base = self.parse_base()?;
        self.skip_ws();
        if self.eat(b'^') {
            self.skip_ws();
            let e = self.parse_uint_checked()?;
            Ok(base.pow(e))
        } else {
            Ok(base)
        }
    }

    fn parse_uint_checked(&mut self) -> Result<u32> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {}
            _ => return Err(self.err("expected a non-negative integer exponent")),
        }
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            return Err(self.err("exponent must be a non-negative integer"));
        }
        let digits = std::str::from_utf8(&self.input[start..self.pos]).unwrap();
        digits.parse::<u32>().map_err(|_| Error::Parse {
            offset: start,
            message: "exponent too large".into(),
        })
    }

    fn parse_base(&mut self) -> Result<Symbol> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.parse_expr()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(inner)
            }
            Some(b'i') => {
                // 'i' unless it starts an identifier we do not know
                self.pos += 1;
                Ok(Symbol::constant(
                    self.n,
                    Coeff::new(Rational::zero(), Rational::one()),
                ))
            }
            Some(b'h') => {
                if self.input[self.pos..].starts_with(b"hbar") {
                    self.pos += 4;
                    Ok(Symbol::hbar(self.n))
                } else {
                    Err(self.err("unknown variable (expected q, p, i or hbar)"))
                }
            }
            Some(c @ (b'q' | b'p')) => {
                self.pos += 1;
                let idx = if matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                    let start = self.pos;
                    while matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                        self.pos += 1;
                    }
                    let digits = std::str::from_utf8(&self.input[start..self.pos]).unwrap();
                    let i: usize = digits.parse().map_err(|_| Error::Parse {
                        offset: start,
                        message: "variable index too large".into(),
                    })?;
                    if i == 0 || i > self.n {
                        return Err(Error::Parse {
                            offset: start,
                            message: format!("variable index {} out of range 1..={}", i, self.n),
                        });
                    }
                    i - 1
                } else {
                    if self.n != 1 {
                        return Err(self.err("unindexed variable requires dimension 1"));
                    }
                    0
                };
                Ok(if c == b'q' {
                    Symbol::var_q(self.n, idx)
                } else {
                    Symbol::var_p(self.n, idx)
                })
            }
            Some(c) if c.is_ascii_digit() => self.parse_number(),
            Some(_) => Err(self.err("unknown variable (expected q, p, i or hbar)")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn parse_digits(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected digits"));
        }
        let digits = std::str::from_utf8(&self.input[start..self.pos]).unwrap();
        Ok(digits.parse().unwrap())
    }

    fn parse_number(&mut self) -> Result<Symbol> {
        let int_part = self.parse_digits()?;
        match self.peek() {
            Some(b'.') => {
                self.pos += 1;
                let start = self.pos;
                let frac = self.parse_digits().map_err(|_| Error::Parse {
                    offset: start,
                    message: "expected digits after decimal point".into(),
                })?;
                let places = (self.pos - start) as u32;
                let den = BigInt::from(10u32).pow(places);
                let num = int_part * &den + frac;
                Ok(Symbol::constant_rational(self.n, Rational::new(num, den)))
            }
            Some(b'/') => {
                self.pos += 1;
                self.skip_ws();
                let den_start = self.pos;
                let den = self.parse_digits().map_err(|_| Error::Parse {
                    offset: den_start,
                    message: "expected denominator digits".into(),
                })?;
                if den.is_zero() {
                    return Err(Error::Parse {
                        offset: den_start,
                        message: "denominator must not be zero".into(),
                    });
                }
                Ok(Symbol::constant_rational(
                    self.n,
                    Rational::new(int_part, den),
                ))
            }
            _ => Ok(Symbol::constant_rational(
                self.n,
                Rational::from_integer(int_part),
            )),
        }
    }
}
