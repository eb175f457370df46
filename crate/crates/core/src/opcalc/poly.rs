//! Multivariate polynomials in named parameters with exact rational
//! coefficients.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rat_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Name of an unknown (or known-but-symbolic) model parameter.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamSymbol(Arc<str>);

impl ParamSymbol {
    pub fn new(name: impl AsRef<str>) -> Self {
        Self(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for ParamSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ParamSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ParamSymbol {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// A power product of parameter symbols. The empty monomial is `1`.
///
/// Ordered by total degree first, then lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(ParamSymbol, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    pub fn var(s: ParamSymbol) -> Self {
        Self(vec![(s, 1)])
    }

    pub fn from_powers(powers: impl IntoIterator<Item = (ParamSymbol, u32)>) -> Self {
        let mut map: BTreeMap<ParamSymbol, u32> = BTreeMap::new();
        for (s, e) in powers {
            *map.entry(s).or_default() += e;
        }
        Self(map.into_iter().filter(|(_, e)| *e > 0).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn powers(&self) -> &[(ParamSymbol, u32)] {
        &self.0
    }

    pub fn exponent(&self, s: &ParamSymbol) -> u32 {
        self.0
            .iter()
            .find(|(t, _)| t == s)
            .map_or(0, |(_, e)| *e)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &ParamSymbol> {
        self.0.iter().map(|(s, _)| s)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_powers(self.0.iter().chain(&other.0).cloned())
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Self) -> Option<Self> {
        let mut out = Vec::with_capacity(self.0.len());
        for (s, e) in &self.0 {
            let d = other.exponent(s);
            if d > *e {
                return None;
            }
            if e - d > 0 {
                out.push((s.clone(), e - d));
            }
        }
        if other.0.iter().any(|(s, _)| self.exponent(s) == 0) {
            return None;
        }
        Some(Self(out))
    }

    /// Greatest common divisor of two monomials.
    pub fn gcd(&self, other: &Self) -> Self {
        Self(
            self.0
                .iter()
                .filter_map(|(s, e)| {
                    let m = (*e).min(other.exponent(s));
                    (m > 0).then(|| (s.clone(), m))
                })
                .collect(),
        )
    }

    pub fn eval(&self, values: &HashMap<ParamSymbol, f64>) -> Option<f64> {
        self.0.iter().try_fold(1.0, |acc, (s, e)| {
            values.get(s).map(|v| acc * v.powi(*e as i32))
        })
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, (s, e)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Sparse polynomial: monomial → nonzero rational coefficient.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ParamPoly(BTreeMap<Monomial, Rational>);

impl ParamPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(q: Rational) -> Self {
        Self::term(Monomial::one(), q)
    }

    pub fn int(n: i64) -> Self {
        Self::constant(rat_int(n))
    }

    pub fn symbol(s: ParamSymbol) -> Self {
        Self::term(Monomial::var(s), Rational::one())
    }

    pub fn term(m: Monomial, q: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(m, q);
        p
    }

    pub fn add_term(&mut self, m: Monomial, q: Rational) {
        if q.is_zero() {
            return;
        }
        match self.0.get_mut(&m) {
            Some(c) => {
                *c += q;
                if c.is_zero() {
                    self.0.remove(&m);
                }
            }
            None => {
                self.0.insert(m, q);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Option<&Rational> {
        self.0.get(m)
    }

    /// The constant polynomial's value, if this is one.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.0.len() {
            0 => Some(Rational::zero()),
            1 => self.0.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn symbols(&self) -> BTreeSet<ParamSymbol> {
        self.0
            .keys()
            .flat_map(|m| m.symbols().cloned())
            .collect()
    }

    pub fn contains(&self, s: &ParamSymbol) -> bool {
        self.0.keys().any(|m| m.exponent(s) > 0)
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        Self(self.0.iter().map(|(m, c)| (m.clone(), c * q)).collect())
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        Self(self.0.iter().map(|(k, c)| (k.mul(m), c.clone())).collect())
    }

    /// Exact division by a monomial; `None` if some term is not divisible.
    pub fn div_monomial(&self, m: &Monomial) -> Option<Self> {
        let mut out = BTreeMap::new();
        for (k, c) in &self.0 {
            out.insert(k.div(m)?, c.clone());
        }
        Some(Self(out))
    }

    /// Largest monomial dividing every term (`1` for the zero polynomial).
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.0.keys();
        match it.next() {
            None => Monomial::one(),
            Some(first) => it.fold(first.clone(), |g, m| g.gcd(m)),
        }
    }

    /// Substitutes a rational value for a symbol.
    pub fn substitute(&self, s: &ParamSymbol, value: &Rational) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.0 {
            let e = m.exponent(s);
            if e == 0 {
                out.add_term(m.clone(), c.clone());
            } else {
                let rest = Monomial::from_powers(m.powers().iter().filter(|(t, _)| t != s).cloned());
                let mut q = c.clone();
                for _ in 0..e {
                    q *= value;
                }
                out.add_term(rest, q);
            }
        }
        out
    }

    /// Numeric value; `None` if a symbol has no value.
    pub fn eval(&self, values: &HashMap<ParamSymbol, f64>) -> Option<f64> {
        self.0.iter().try_fold(0.0, |acc, (m, c)| {
            m.eval(values).map(|v| acc + rat_to_f64(c) * v)
        })
    }
}

impl Add for &ParamPoly {
    type Output = ParamPoly;
    fn add(self, rhs: &ParamPoly) -> ParamPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&ParamPoly> for ParamPoly {
    fn add_assign(&mut self, rhs: &ParamPoly) {
        for (m, c) in &rhs.0 {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl Neg for &ParamPoly {
    type Output = ParamPoly;
    fn neg(self) -> ParamPoly {
        ParamPoly(self.0.iter().map(|(m, c)| (m.clone(), -c)).collect())
    }
}

impl Sub for &ParamPoly {
    type Output = ParamPoly;
    fn sub(self, rhs: &ParamPoly) -> ParamPoly {
        self + &(-rhs)
    }
}

impl Mul for &ParamPoly {
    type Output = ParamPoly;
    fn mul(self, rhs: &ParamPoly) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &rhs.0 {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl fmt::Debug for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// `2*alpha*E0 - 1/2*E0^2 + 3`; monomials in canonical order.
impl fmt::Display for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.0.iter().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else if c.is_negative() {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            match (m.is_one(), mag.is_one()) {
                (true, _) => f.write_str(&fmt_rational(&mag))?,
                (false, true) => write!(f, "{m}")?,
                (false, false) => write!(f, "{}*{m}", fmt_rational(&mag))?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(s: &str) -> ParamPoly {
        ParamPoly::symbol(ParamSymbol::new(s))
    }

    #[test]
    fn arithmetic_and_cancellation() {
        let a = sym("alpha");
        let e = sym("E0");
        let p = &(&a * &e) + &ParamPoly::int(2);
        let q = &p - &(&e * &a);
        assert_eq!(q, ParamPoly::int(2));
        assert!((&p - &p).is_zero());
        assert_eq!(p.to_string(), "2 + E0*alpha");
    }

    #[test]
    fn monomial_order_is_degree_first() {
        let a = Monomial::var("alpha".into());
        let ae = Monomial::from_powers([("alpha".into(), 1), ("E0".into(), 1)]);
        let b = Monomial::var("b".into());
        assert!(Monomial::one() < a);
        assert!(a < b);
        assert!(b < ae);
    }

    #[test]
    fn content_and_division() {
        let a = sym("beta");
        let p = &(&a * &a) + &(&a * &sym("c"));
        let content = p.monomial_content();
        assert_eq!(content, Monomial::var("beta".into()));
        let q = p.div_monomial(&content).unwrap();
        assert_eq!(q, &a + &sym("c"));
        assert!(q.div_monomial(&content).is_none());
    }

    #[test]
    fn substitute_and_eval() {
        let a = sym("a");
        let p = &(&a * &a) + &sym("b");
        let s = p.substitute(&"a".into(), &rat(1, 2));
        assert_eq!(s, &ParamPoly::constant(rat(1, 4)) + &sym("b"));
        let vals = HashMap::from([("a".into(), 2.0), ("b".into(), 1.0)]);
        assert_eq!(p.eval(&vals), Some(5.0));
        assert_eq!(p.eval(&HashMap::new()), None);
    }
}
