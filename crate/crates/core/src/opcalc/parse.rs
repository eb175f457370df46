//! Text syntax for parameter polynomials and Laurent polynomials in `s`.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := power (('*' | '/') power)*        '/' only by a number
//! power  := atom ['^' int]                    negative int only on s
//! atom   := number | ident | '(' expr ')'
//! number := digits ['.' digits] | digits '/' digits
//! ```
//! The identifier `s` is the operator variable; every other identifier is a
//! parameter symbol.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use super::expr::{OpExpr, SignalId};
use super::frac::Tag;
use super::poly::{ParamPoly, ParamSymbol, Rational};
use crate::error::{Error, Result};

/// `Σ_k c_k s^k` with parameter-polynomial coefficients.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct LaurentPoly(BTreeMap<i32, ParamPoly>);

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: ParamPoly) -> Self {
        let mut out = Self::zero();
        out.add(0, &c);
        out
    }

    pub fn s_pow(k: i32) -> Self {
        let mut out = Self::zero();
        out.add(k, &ParamPoly::one());
        out
    }

    fn add(&mut self, k: i32, c: &ParamPoly) {
        let slot = self.0.entry(k).or_default();
        *slot += c;
        if slot.is_zero() {
            self.0.remove(&k);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &ParamPoly)> {
        self.0.iter().map(|(k, c)| (*k, c))
    }

    /// The coefficient when no power of `s` other than `s^0` occurs.
    pub fn as_param_poly(&self) -> Option<ParamPoly> {
        match self.0.len() {
            0 => Some(ParamPoly::zero()),
            1 => self.0.get(&0).cloned(),
            _ => None,
        }
    }

    /// `Σ_k c_k s^k · x̂` for the signal `x`.
    pub fn apply(&self, signal: &SignalId) -> OpExpr {
        let x = OpExpr::signal(signal.clone());
        let mut out = OpExpr::zero();
        for (k, c) in &self.0 {
            out = &out + &x.shift(*k).scale(c);
        }
        out
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (k1, c1) in &self.0 {
            for (k2, c2) in &other.0 {
                out.add(k1 + k2, &(c1 * c2));
            }
        }
        out
    }

    fn scale(&self, q: &Rational) -> Self {
        let mut out = Self::zero();
        for (k, c) in &self.0 {
            out.add(*k, &c.scale(q));
        }
        out
    }

    fn plus(&self, other: &Self, sign: i64) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.0 {
            out.add(*k, &c.scale(&Rational::from_integer(sign.into())));
        }
        out
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, c)) in self.0.iter().rev().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            match k {
                0 => write!(f, "({c})")?,
                _ => write!(f, "({c})*s^{k}")?,
            }
        }
        Ok(())
    }
}

pub fn parse_laurent(src: &str) -> Result<LaurentPoly> {
    let mut p = Parser::new(src);
    let out = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(out)
}

/// Parses a polynomial that must not contain `s`.
pub fn parse_param_poly(src: &str) -> Result<ParamPoly> {
    parse_laurent(src)?
        .as_param_poly()
        .ok_or_else(|| Error::Parse(format!("`{src}`: operator variable s not allowed here")))
}

/// An exponent tag: a rational number or a single parameter symbol.
pub fn parse_tag(src: &str) -> Result<Tag> {
    let t = src.trim();
    if is_ident(t) {
        if t == "s" {
            return Err(Error::Parse("`s` cannot be an exponent symbol".into()));
        }
        return Ok(Tag::Symbol(ParamSymbol::new(t)));
    }
    let p = parse_param_poly(t)?;
    p.as_constant()
        .map(Tag::Known)
        .ok_or_else(|| Error::Parse(format!("`{src}` is neither a number nor a symbol")))
}

pub fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    fn error(&self, msg: &str) -> Error {
        Error::Parse(format!("`{}` at offset {}: {msg}", self.src, self.pos))
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<LaurentPoly> {
        let mut sign = if self.eat('-') {
            -1
        } else {
            self.eat('+');
            1
        };
        let mut acc = LaurentPoly::zero();
        loop {
            let t = self.term()?;
            acc = acc.plus(&t, sign);
            if self.eat('+') {
                sign = 1;
            } else if self.eat('-') {
                sign = -1;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<LaurentPoly> {
        let mut acc = self.power()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.power()?);
            } else if self.eat('/') {
                let q = self.number()?;
                if q.is_zero() {
                    return Err(self.error("division by zero"));
                }
                acc = acc.scale(&q.recip());
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<LaurentPoly> {
        let (base, is_s) = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let paren = self.eat('(');
        let neg = self.eat('-');
        let n = self.integer()?;
        if paren && !self.eat(')') {
            return Err(self.error("expected `)`"));
        }
        let n: i32 = n
            .try_into()
            .map_err(|_| self.error("exponent out of range"))?;
        if is_s {
            return Ok(LaurentPoly::s_pow(if neg { -n } else { n }));
        }
        if neg {
            return Err(self.error("negative exponent allowed only on s"));
        }
        let mut out = LaurentPoly::constant(ParamPoly::one());
        for _ in 0..n {
            out = out.mul(&base);
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<(LaurentPoly, bool)> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected `)`"));
                }
                Ok((e, false))
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                Ok((LaurentPoly::constant(ParamPoly::constant(self.number()?)), false))
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
                {
                    self.pos += 1;
                }
                let name = &self.src[start..self.pos];
                if name == "s" {
                    Ok((LaurentPoly::s_pow(1), true))
                } else {
                    let p = ParamPoly::symbol(ParamSymbol::new(name));
                    Ok((LaurentPoly::constant(p), false))
                }
            }
            _ => Err(self.error("expected number, symbol or `(`")),
        }
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let d = self.digits();
        d.parse().map_err(|_| self.error("expected integer"))
    }

    /// Integer, decimal or `p/q` fraction, parsed exactly.
    fn number(&mut self) -> Result<Rational> {
        self.skip_ws();
        let int = self.digits();
        let mut q = if int.is_empty() {
            Rational::zero()
        } else {
            Rational::from_integer(int.parse().expect("digits"))
        };
        if self.peek() == Some('.') {
            self.pos += 1;
            let frac = self.digits();
            if int.is_empty() && frac.is_empty() {
                return Err(self.error("expected digits"));
            }
            if !frac.is_empty() {
                let num: BigInt = frac.parse().expect("digits");
                let den = num_traits::pow(BigInt::from(10), frac.len());
                q += Rational::new(num, den);
            }
        } else if int.is_empty() {
            return Err(self.error("expected number"));
        } else {
            let save = self.pos;
            self.skip_ws();
            // `3/4` binds as one number; `x/4` is handled in `term`.
            if self.peek() == Some('/') {
                self.pos += 1;
                self.skip_ws();
                if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    let den: BigInt = self.digits().parse().expect("digits");
                    if den.is_zero() {
                        return Err(self.error("zero denominator"));
                    }
                    q /= Rational::from_integer(den);
                } else {
                    self.pos = save;
                }
            } else {
                self.pos = save;
            }
        }
        Ok(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcalc::poly::{rat, rat_int, Monomial};

    fn sym(s: &str) -> ParamPoly {
        ParamPoly::symbol(ParamSymbol::new(s))
    }

    #[test]
    fn laurent_examples() {
        let p = parse_laurent("a1*s + a0").unwrap();
        let mut expected = LaurentPoly::zero();
        expected.add(1, &sym("a1"));
        expected.add(0, &sym("a0"));
        assert_eq!(p, expected);

        let p = parse_laurent("2*alpha*s^-1 - 3/4").unwrap();
        let mut expected = LaurentPoly::zero();
        expected.add(-1, &sym("alpha").scale(&rat_int(2)));
        expected.add(0, &ParamPoly::constant(rat(-3, 4)));
        assert_eq!(p, expected);
    }

    #[test]
    fn decimals_are_exact() {
        let p = parse_param_poly("0.25*E1 + 1.5").unwrap();
        assert_eq!(
            p.coeff(&Monomial::var(ParamSymbol::new("E1"))),
            Some(&rat(1, 4))
        );
        assert_eq!(p.as_constant(), None);
        assert_eq!(parse_param_poly("1.5").unwrap().as_constant(), Some(rat(3, 2)));
    }

    #[test]
    fn parentheses_and_powers() {
        let p = parse_param_poly("(a + b)^2 - a^2 - b^2").unwrap();
        assert_eq!(p, (&sym("a") * &sym("b")).scale(&rat_int(2)));
        let p = parse_laurent("s^(-2)*(s + 1)").unwrap();
        let mut expected = LaurentPoly::s_pow(-1);
        expected.add(-2, &ParamPoly::one());
        assert_eq!(p, expected);
        assert_eq!(parse_param_poly("-E1").unwrap(), -&sym("E1"));
        assert_eq!(parse_param_poly("c/2").unwrap(), sym("c").scale(&rat(1, 2)));
    }

    #[test]
    fn rejects_bad_input() {
        for bad in ["", "a +", "a^-1", "s*", "(a", "a b", "1/0", "E0 * s"] {
            let r = if bad == "E0 * s" {
                parse_param_poly(bad).map(|_| ())
            } else {
                parse_laurent(bad).map(|_| ())
            };
            assert!(r.is_err(), "{bad}");
        }
    }

    #[test]
    fn tags() {
        assert_eq!(parse_tag("alpha").unwrap(), Tag::symbol("alpha"));
        assert_eq!(parse_tag("1/2").unwrap(), Tag::Known(rat(1, 2)));
        assert_eq!(parse_tag("0").unwrap(), Tag::zero());
        assert!(parse_tag("s").is_err());
        assert!(parse_tag("a+b").is_err());
    }

    #[test]
    fn apply_to_signal() {
        let p = parse_laurent("E0 + E1*s^-1").unwrap();
        let e = p.apply(&SignalId::new("eps"));
        let expected = &OpExpr::signal("eps").scale(&sym("E0"))
            + &OpExpr::signal("eps").shift(-1).scale(&sym("E1"));
        assert_eq!(e, expected);
    }
}
