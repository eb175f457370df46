//! Operational expressions over signal symbols with Laurent-polynomial
//! dependence on `s`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::poly::{rat_int, Monomial, ParamPoly, Rational};

/// Identifier of a measured signal (`u`, `y`, `eps`, ...).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignalId(Arc<str>);

impl SignalId {
    pub fn new(name: impl AsRef<str>) -> Self {
        Self(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for SignalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for SignalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SignalId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// The `order`-th `s`-derivative of a signal's operator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Factor {
    pub signal: SignalId,
    pub order: u32,
}

impl Factor {
    pub fn new(signal: SignalId, order: u32) -> Self {
        Self { signal, order }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.signal)?;
        for _ in 0..self.order {
            f.write_str("'")?;
        }
        Ok(())
    }
}

/// Structural part of a term: `s^s_power` times a sorted factor multiset.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct TermKey {
    pub s_power: i32,
    pub factors: Vec<Factor>,
}

impl TermKey {
    pub fn new(s_power: i32, mut factors: Vec<Factor>) -> Self {
        factors.sort();
        Self { s_power, factors }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Self::new(self.s_power + other.s_power, factors)
    }
}

/// Canonical sum of `coeff · s^k · Π factors`, like terms merged.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct OpExpr(BTreeMap<TermKey, ParamPoly>);

impl OpExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The operator of a single signal.
    pub fn signal(id: impl Into<SignalId>) -> Self {
        Self::term(ParamPoly::one(), 0, vec![Factor::new(id.into(), 0)])
    }

    /// A bare coefficient times `s^k` (no signal factors).
    pub fn constant(coeff: ParamPoly, s_power: i32) -> Self {
        Self::term(coeff, s_power, Vec::new())
    }

    pub fn s_pow(k: i32) -> Self {
        Self::constant(ParamPoly::one(), k)
    }

    pub fn term(coeff: ParamPoly, s_power: i32, factors: Vec<Factor>) -> Self {
        let mut e = Self::zero();
        e.add_term(TermKey::new(s_power, factors), &coeff);
        e
    }

    pub fn add_term(&mut self, key: TermKey, coeff: &ParamPoly) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.0.entry(key.clone()).or_default();
        *slot += coeff;
        if slot.is_zero() {
            self.0.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &ParamPoly)> {
        self.0.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.0.len()
    }

    pub fn coeff(&self, key: &TermKey) -> Option<&ParamPoly> {
        self.0.get(key)
    }

    pub fn scale(&self, c: &ParamPoly) -> Self {
        let mut out = Self::zero();
        for (k, v) in &self.0 {
            out.add_term(k.clone(), &(v * c));
        }
        out
    }

    pub fn scale_rational(&self, q: &Rational) -> Self {
        self.scale(&ParamPoly::constant(q.clone()))
    }

    /// Multiplies by `s^k`.
    pub fn shift(&self, k: i32) -> Self {
        Self(
            self.0
                .iter()
                .map(|(key, c)| {
                    (
                        TermKey {
                            s_power: key.s_power + k,
                            factors: key.factors.clone(),
                        },
                        c.clone(),
                    )
                })
                .collect(),
        )
    }

    pub fn map_coeffs(&self, f: impl Fn(&ParamPoly) -> ParamPoly) -> Self {
        let mut out = Self::zero();
        for (k, v) in &self.0 {
            out.add_term(k.clone(), &f(v));
        }
        out
    }

    pub fn max_s_power(&self) -> Option<i32> {
        self.0.keys().map(|k| k.s_power).max()
    }

    /// All parameter monomials appearing in any coefficient.
    pub fn monomials(&self) -> BTreeSet<Monomial> {
        self.0
            .values()
            .flat_map(|c| c.terms().map(|(m, _)| m.clone()))
            .collect()
    }

    pub fn signals(&self) -> BTreeSet<SignalId> {
        self.0
            .keys()
            .flat_map(|k| k.factors.iter().map(|f| f.signal.clone()))
            .collect()
    }

    /// Largest parameter monomial dividing every coefficient.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.0.values().map(ParamPoly::monomial_content);
        match it.next() {
            None => Monomial::one(),
            Some(first) => it.fold(first, |g, m| g.gcd(&m)),
        }
    }

    pub fn div_monomial(&self, m: &Monomial) -> Option<Self> {
        let mut out = Self::zero();
        for (k, v) in &self.0 {
            out.add_term(k.clone(), &v.div_monomial(m)?);
        }
        Some(out)
    }

    /// Coefficient of one parameter monomial, as an expression with
    /// rational coefficients.
    pub fn monomial_part(&self, m: &Monomial) -> Self {
        let mut out = Self::zero();
        for (k, v) in &self.0 {
            if let Some(q) = v.coeff(m) {
                out.add_term(k.clone(), &ParamPoly::constant(q.clone()));
            }
        }
        out
    }

    /// `d/ds` by the product rule: `d/ds s^k = k s^{k−1}` and each factor's
    /// derivative order is raised in turn.
    pub fn dds(&self) -> Self {
        let mut out = Self::zero();
        for (key, c) in &self.0 {
            if key.s_power != 0 {
                out.add_term(
                    TermKey {
                        s_power: key.s_power - 1,
                        factors: key.factors.clone(),
                    },
                    &c.scale(&rat_int(i64::from(key.s_power))),
                );
            }
            for i in 0..key.factors.len() {
                let mut factors = key.factors.clone();
                factors[i].order += 1;
                out.add_term(TermKey::new(key.s_power, factors), c);
            }
        }
        out
    }

    /// Multiplies by `s^{−k}` with `k = max(0, max s-power)` so that no
    /// positive power of `s` remains; returns `k` alongside.
    pub fn normalize(&self) -> (Self, u32) {
        let k = self.max_s_power().unwrap_or(0).max(0);
        (self.shift(-k), k as u32)
    }
}

impl Add for &OpExpr {
    type Output = OpExpr;
    fn add(self, rhs: &OpExpr) -> OpExpr {
        let mut out = self.clone();
        for (k, v) in &rhs.0 {
            out.add_term(k.clone(), v);
        }
        out
    }
}

impl Neg for &OpExpr {
    type Output = OpExpr;
    fn neg(self) -> OpExpr {
        OpExpr(self.0.iter().map(|(k, v)| (k.clone(), -v)).collect())
    }
}

impl Sub for &OpExpr {
    type Output = OpExpr;
    fn sub(self, rhs: &OpExpr) -> OpExpr {
        self + &(-rhs)
    }
}

impl Mul for &OpExpr {
    type Output = OpExpr;
    fn mul(self, rhs: &OpExpr) -> OpExpr {
        let mut out = OpExpr::zero();
        for (k1, c1) in &self.0 {
            for (k2, c2) in &rhs.0 {
                out.add_term(k1.mul(k2), &(c1 * c2));
            }
        }
        out
    }
}

/// One term per line: `(coeff)*s^k*factor*factor`, `s^0` omitted.
impl fmt::Display for OpExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        for (i, (key, c)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "({c})")?;
            if key.s_power != 0 {
                write!(f, "*s^{}", key.s_power)?;
            }
            for fac in &key.factors {
                write!(f, "*{fac}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for OpExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
