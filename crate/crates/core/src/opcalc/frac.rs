//! Expressions grouped by symbolic fractional powers `s^{α_j}`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use super::expr::OpExpr;
use super::poly::{rat_to_f64, ParamPoly, ParamSymbol, Rational};

/// Exponent tag of a group: a known rational or an unknown order symbol.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Tag {
    Known(Rational),
    Symbol(ParamSymbol),
}

impl Tag {
    pub fn zero() -> Self {
        Tag::Known(Rational::zero())
    }

    pub fn symbol(name: &str) -> Self {
        Tag::Symbol(ParamSymbol::new(name))
    }

    pub fn is_known(&self) -> bool {
        matches!(self, Tag::Known(_))
    }

    /// The known integer value, if any.
    pub fn as_integer(&self) -> Option<i32> {
        match self {
            Tag::Known(q) if q.is_integer() => q.numer().try_into().ok(),
            _ => None,
        }
    }

    /// The exponent as a polynomial coefficient.
    pub fn as_poly(&self) -> ParamPoly {
        match self {
            Tag::Known(q) => ParamPoly::constant(q.clone()),
            Tag::Symbol(s) => ParamPoly::symbol(s.clone()),
        }
    }

    /// Numeric value, looking symbols up in `values`.
    pub fn value(&self, values: &std::collections::HashMap<ParamSymbol, f64>) -> Option<f64> {
        match self {
            Tag::Known(q) => Some(rat_to_f64(q)),
            Tag::Symbol(s) => values.get(s).copied(),
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Known(q) if q.is_integer() => write!(f, "{}", q.numer()),
            Tag::Known(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            Tag::Symbol(s) => write!(f, "{s}"),
        }
    }
}

/// `Σ_j E_j · s^{α_j}`, one slot per distinct exponent tag. Slots may hold
/// the zero expression; they are kept so degenerate groups stay visible.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct FracOpExpr(BTreeMap<Tag, OpExpr>);

impl FracOpExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(tag: Tag, e: OpExpr) -> Self {
        let mut out = Self::new();
        out.add_slot(tag, &e);
        out
    }

    /// Adds `e` into the slot for `tag`, creating it if absent.
    pub fn add_slot(&mut self, tag: Tag, e: &OpExpr) {
        let slot = self.0.entry(tag).or_default();
        *slot = &*slot + e;
    }

    pub fn slot(&self, tag: &Tag) -> Option<&OpExpr> {
        self.0.get(tag)
    }

    pub fn slots(&self) -> impl Iterator<Item = (&Tag, &OpExpr)> {
        self.0.iter()
    }

    pub fn tags(&self) -> Vec<Tag> {
        self.0.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn map_slots(&self, f: impl Fn(&Tag, &OpExpr) -> OpExpr) -> Self {
        Self(self.0.iter().map(|(t, e)| (t.clone(), f(t, e))).collect())
    }

    /// Folds every known integer tag `k` into the `s^0` slot by multiplying
    /// its expression with `s^k`.
    pub fn fold_integer_tags(&self) -> Self {
        let mut out = Self::new();
        for (tag, e) in &self.0 {
            match tag.as_integer() {
                Some(k) => out.add_slot(Tag::zero(), &e.shift(k)),
                None => out.add_slot(tag.clone(), e),
            }
        }
        out
    }

    /// `d/ds (E · s^α) = (dE/ds + α s^{−1} E) · s^α`, slot by slot.
    pub fn dds(&self) -> Self {
        self.map_slots(dds_tagged)
    }

    /// Applies `s·d/ds − β` to the whole expression. This Euler operator
    /// annihilates `s^β`.
    pub fn euler_shift(&self, beta: &ParamPoly) -> Self {
        let d = self.dds();
        Self(
            self.0
                .iter()
                .map(|(t, e)| {
                    let de = d.0[t].shift(1);
                    (t.clone(), &de - &e.scale(beta))
                })
                .collect(),
        )
    }

    pub fn map_coeffs(&self, f: impl Fn(&ParamPoly) -> ParamPoly) -> Self {
        self.map_slots(|_, e| e.map_coeffs(&f))
    }

    pub fn substitute(&self, s: &ParamSymbol, value: &Rational) -> Self {
        self.map_coeffs(|c| c.substitute(s, value))
    }

    pub fn contains_symbol(&self, s: &ParamSymbol) -> bool {
        self.0.iter().any(|(t, e)| {
            matches!(t, Tag::Symbol(x) if x == s)
                || e.terms().any(|(_, c)| c.contains(s))
        })
    }
}

/// `d/ds` of a single slot under `s^α`: `dE/ds + α s^{−1} E`.
pub fn dds_tagged(tag: &Tag, e: &OpExpr) -> OpExpr {
    let alpha = tag.as_poly();
    if alpha.is_zero() {
        e.dds()
    } else {
        &e.dds() + &e.shift(-1).scale(&alpha)
    }
}

impl fmt::Display for FracOpExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (t, e)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            writeln!(f, "[s^{t}]")?;
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcalc::expr::Factor;

    #[test]
    fn dds_of_tagged_signal() {
        // d/ds(ŷ s^α) = (ŷ' + α s^{-1} ŷ) s^α
        let alpha = Tag::symbol("alpha");
        let e = FracOpExpr::single(alpha.clone(), OpExpr::signal("y"));
        let d = e.dds();
        let expected = &OpExpr::term(ParamPoly::one(), 0, vec![Factor::new("y".into(), 1)])
            + &OpExpr::term(
                ParamPoly::symbol("alpha".into()),
                -1,
                vec![Factor::new("y".into(), 0)],
            );
        assert_eq!(d.slot(&alpha), Some(&expected));
    }

    #[test]
    fn euler_shift_annihilates_matching_power() {
        // (s d/ds − (α − 1)) applied to c·s^{−1}·s^α vanishes.
        let alpha = Tag::symbol("alpha");
        let c = OpExpr::constant(ParamPoly::symbol("c".into()), -1);
        let e = FracOpExpr::single(alpha.clone(), c);
        let beta = &alpha.as_poly() - &ParamPoly::one();
        assert!(e.euler_shift(&beta).slot(&alpha).unwrap().is_zero());
    }

    #[test]
    fn integer_tags_fold_into_zero_slot() {
        let mut e = FracOpExpr::new();
        e.add_slot(Tag::Known(crate::opcalc::poly::rat_int(1)), &OpExpr::signal("y"));
        e.add_slot(Tag::zero(), &OpExpr::signal("u"));
        let f = e.fold_integer_tags();
        assert_eq!(f.len(), 1);
        let expected = &OpExpr::signal("y").shift(1) + &OpExpr::signal("u");
        assert_eq!(f.slot(&Tag::zero()), Some(&expected));
    }
}
