//! Text form of polynomials, e.g. `2*x1^2*x2 - 1/4`.
//!
//! Grammar accepted by [`parse_polynomial`]:
//!
//! ```text
//! equation := expr [ '=' expr ]
//! expr     := [sign] term { sign term }
//! term     := factor { '*' factor }
//! factor   := number | ident [ '^' uint ] | '(' expr ')' [ '^' uint ]
//! number   := digits [ '.' digits ] [ '/' digits ]
//! ident    := [A-Za-z][A-Za-z0-9_]*
//! ```
//!
//! An equation `a = b` parses as `a - b`.

use std::fmt::{self, Write};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::coeff::{Coeff, Rational};
use super::monomial::{Monomial, MonomialOrder};
use super::polynomial::{Polynomial, Ring};
use super::PolyError;

pub(crate) fn render<C: Coeff>(p: &Polynomial<C>, ord: &MonomialOrder) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let ring = p.ring();
    let mut out = String::new();
    for (i, (m, c)) in p.sorted_terms(ord).iter().enumerate() {
        let neg = c.is_negative();
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let unit = c.is_one() || c.neg().is_one();
        let mono = render_monomial(ring, m);
        if mono.is_empty() {
            write!(out, "{}", Abs(c)).unwrap();
        } else if unit {
            out.push_str(&mono);
        } else {
            write!(out, "{}*{}", Abs(c), mono).unwrap();
        }
    }
    out
}

struct Abs<'a, C: Coeff>(&'a C);

impl<C: Coeff> fmt::Display for Abs<'_, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_abs(f)
    }
}

fn render_monomial(ring: &Ring, m: &Monomial) -> String {
    let mut parts = Vec::new();
    for (v, &e) in m.exponents().iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(ring.name(v).to_string()),
            _ => parts.push(format!("{}^{}", ring.name(v), e)),
        }
    }
    parts.join("*")
}

/// Parses one polynomial (or equation) over `ring`.
pub fn parse_polynomial<C: Coeff>(ring: &Arc<Ring>, text: &str) -> Result<Polynomial<C>, PolyError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        ring,
    };
    let lhs = p.expr::<C>()?;
    p.skip_ws();
    let out = if p.eat(b'=') {
        let rhs = p.expr::<C>()?;
        lhs.try_sub(&rhs)?
    } else {
        lhs
    };
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(out)
}

/// Parses one polynomial per non-empty line; `#` starts a comment.
pub fn parse_system<C: Coeff>(ring: &Arc<Ring>, text: &str) -> Result<Vec<Polynomial<C>>, PolyError> {
    text.lines()
        .enumerate()
        .filter_map(|(lineno, line)| {
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                None
            } else {
                Some(parse_polynomial(ring, body).map_err(|e| match e {
                    PolyError::Parse { pos, msg } => PolyError::Parse {
                        pos,
                        msg: format!("line {}: {}", lineno + 1, msg),
                    },
                    other => other,
                }))
            }
        })
        .collect()
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ring: &'a Arc<Ring>,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> PolyError {
        PolyError::Parse {
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr<C: Coeff>(&mut self) -> Result<Polynomial<C>, PolyError> {
        let mut neg = false;
        if self.eat(b'-') {
            neg = true;
        } else {
            self.eat(b'+');
        }
        let mut acc = self.term::<C>()?;
        if neg {
            acc = -acc;
        }
        loop {
            if self.eat(b'+') {
                let t = self.term::<C>()?;
                acc = acc.try_add(&t)?;
            } else if self.eat(b'-') {
                let t = self.term::<C>()?;
                acc = acc.try_sub(&t)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term<C: Coeff>(&mut self) -> Result<Polynomial<C>, PolyError> {
        let mut acc = self.factor::<C>()?;
        while self.eat(b'*') {
            let f = self.factor::<C>()?;
            acc = acc.try_mul(&f)?;
        }
        Ok(acc)
    }

    fn factor<C: Coeff>(&mut self) -> Result<Polynomial<C>, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr::<C>()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                let e = self.exponent()?;
                Ok(inner.pow(e))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let r = self.number()?;
                Ok(Polynomial::constant(self.ring, C::from_rational(&r)))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let idx = self
                    .ring
                    .index_of(name)
                    .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
                let e = self.exponent()?;
                let mut m = Monomial::one(self.ring.nvars());
                m.0[idx] = e;
                Ok(Polynomial::from_terms(self.ring, [(m, C::one())]))
            }
            _ => Err(self.error("expected number, variable or '('")),
        }
    }

    fn exponent(&mut self) -> Result<u32, PolyError> {
        if !self.eat(b'^') {
            return Ok(1);
        }
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected exponent"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.error("exponent out of range"))
    }

    fn digits(&mut self) -> &str {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap()
    }

    fn number(&mut self) -> Result<Rational, PolyError> {
        self.skip_ws();
        let int_part = self.digits().to_string();
        let mut value = if int_part.is_empty() {
            <Rational as Zero>::zero()
        } else {
            Rational::from_integer(int_part.parse::<BigInt>().unwrap())
        };
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            let frac = self.digits().to_string();
            if frac.is_empty() && int_part.is_empty() {
                return Err(self.error("malformed number"));
            }
            if !frac.is_empty() {
                let num: BigInt = frac.parse().unwrap();
                let den = BigInt::from(10).pow(frac.len() as u32);
                value += Rational::new(num, den);
            }
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'/' {
            self.pos += 1;
            let den = self.digits().to_string();
            if den.is_empty() {
                return Err(self.error("expected denominator"));
            }
            let d: BigInt = den.parse().unwrap();
            if d.is_zero() {
                return Err(self.error("zero denominator"));
            }
            value /= Rational::from_integer(d);
        }
        debug_assert!(value.denom() >= &BigInt::one());
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> Arc<Ring> {
        Ring::new(&["x1", "x2"]).unwrap()
    }

    #[test]
    fn renders_golden_form() {
        let r = ring();
        let p: Polynomial<Rational> = parse_polynomial(&r, "2*x1^2*x2 - 1/4").unwrap();
        assert_eq!(p.to_text(), "2*x1^2*x2 - 1/4");
        let q: Polynomial<Rational> = parse_polynomial(&r, "-x2 + x1 - 1").unwrap();
        assert_eq!(q.to_text(), "x1 - x2 - 1");
    }

    #[test]
    fn parses_equations_and_parentheses() {
        let r = ring();
        let p: Polynomial<Rational> = parse_polynomial(&r, "(x1 + 1)^2 = 2*x1").unwrap();
        assert_eq!(p.to_text(), "x1^2 + 1");
        let d: Polynomial<Rational> = parse_polynomial(&r, "0.25*x1 + 1.5").unwrap();
        assert_eq!(d.to_text(), "1/4*x1 + 3/2");
    }

    #[test]
    fn zero_renders_as_zero() {
        let p: Polynomial<Rational> = parse_polynomial(&ring(), "x1 - x1").unwrap();
        assert_eq!(p.to_text(), "0");
    }

    #[test]
    fn reports_errors() {
        let r = ring();
        assert!(matches!(
            parse_polynomial::<Rational>(&r, "x3 + 1"),
            Err(PolyError::UnknownVariable(_))
        ));
        assert!(matches!(
            parse_polynomial::<Rational>(&r, "x1 +"),
            Err(PolyError::Parse { .. })
        ));
        assert!(matches!(
            parse_polynomial::<Rational>(&r, "1/0"),
            Err(PolyError::Parse { .. })
        ));
    }

    #[test]
    fn system_skips_comments() {
        let r = ring();
        let sys = parse_system::<Rational>(&r, "# header\nx1^2 - 1\n\nx1 - x2 # tail\n").unwrap();
        assert_eq!(sys.len(), 2);
    }
}
