//! Declaration of a grouped fractional model `Σ_j (a_j ŷ − b_j û) s^{α_j} = 0`
//! and its preparation for elimination.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::fracops::Convention;
use crate::opcalc::{
    parse_laurent, parse_tag, FracOpExpr, LaurentPoly, Monomial, OpExpr, ParamPoly, ParamSymbol,
    Rational, SignalId, Tag,
};

/// How nonzero initial values are handled.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Regime {
    /// All initial-value terms vanish.
    Homogeneous,
    /// Initial-value constants are annihilated before `P` is built.
    EliminateInit,
    /// Initial-value constants become additional unknowns.
    IdentifyInit,
}

/// One exponent group `(a ŷ − b û) s^{tag}`.
#[derive(Clone, PartialEq, Debug)]
pub struct Group {
    pub tag: Tag,
    pub a: LaurentPoly,
    pub b: LaurentPoly,
}

impl Group {
    pub fn new(tag: Tag, a: LaurentPoly, b: LaurentPoly) -> Self {
        Self { tag, a, b }
    }

    /// Parses tag and coefficients from text, e.g. `("alpha", "0", "E1")`.
    pub fn parse(tag: &str, a: &str, b: &str) -> Result<Self> {
        Ok(Self::new(parse_tag(tag)?, parse_laurent(a)?, parse_laurent(b)?))
    }

    fn coeffs(&self) -> impl Iterator<Item = (i32, &ParamPoly)> {
        self.a.terms().chain(self.b.terms())
    }

    fn symbols(&self) -> BTreeSet<ParamSymbol> {
        let mut out: BTreeSet<_> = self.coeffs().flat_map(|(_, c)| c.symbols()).collect();
        if let Tag::Symbol(s) = &self.tag {
            out.insert(s.clone());
        }
        out
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct ModelSpec {
    pub convention: Convention,
    pub regime: Regime,
    pub groups: Vec<Group>,
    /// Common factors of single groups, recovered after elimination.
    pub theta2: Vec<ParamSymbol>,
    /// Upper bound `ν` on all orders; needed for symbolic orders outside the
    /// homogeneous regime.
    pub order_bound: Option<u32>,
    /// Parameter fixed to 1 so the eliminated equation has a parameter-free
    /// term; the other estimates are then ratios to it.
    pub normalize_by: Option<ParamSymbol>,
    pub input: SignalId,
    pub output: SignalId,
}

impl ModelSpec {
    /// Homogeneous Riemann–Liouville model on signals `u` → `y`.
    pub fn new(groups: Vec<Group>) -> Self {
        Self {
            convention: Convention::RiemannLiouville,
            regime: Regime::Homogeneous,
            groups,
            theta2: Vec::new(),
            order_bound: None,
            normalize_by: None,
            input: SignalId::new("u"),
            output: SignalId::new("y"),
        }
    }

    /// `σ = E0 ε + E1 D^α ε` with `E1` in Θ₂, on signals `eps` → `sigma`.
    pub fn voigt() -> Self {
        let groups = vec![
            Group::parse("0", "1", "E0").expect("static"),
            Group::parse("alpha", "0", "E1").expect("static"),
        ];
        Self {
            theta2: vec![ParamSymbol::new("E1")],
            order_bound: Some(1),
            input: SignalId::new("eps"),
            output: SignalId::new("sigma"),
            ..Self::new(groups)
        }
    }

    pub fn with_regime(mut self, convention: Convention, regime: Regime) -> Self {
        self.convention = convention;
        self.regime = regime;
        self
    }

    /// All unknowns Θ.
    pub fn symbols(&self) -> BTreeSet<ParamSymbol> {
        self.groups.iter().flat_map(Group::symbols).collect()
    }

    /// Order symbols, in group order.
    pub fn tag_symbols(&self) -> Vec<ParamSymbol> {
        self.groups
            .iter()
            .filter_map(|g| match &g.tag {
                Tag::Symbol(s) => Some(s.clone()),
                Tag::Known(_) => None,
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::DegenerateModel(m));
        if self.groups.is_empty() {
            return bad("model has no groups".into());
        }
        if !self.groups.iter().any(|g| g.tag.is_known()) {
            return bad("at least one order must be known".into());
        }
        let tags: BTreeSet<_> = self.groups.iter().map(|g| &g.tag).collect();
        if tags.len() != self.groups.len() {
            return bad("exponent tags must be distinct".into());
        }
        if self.input == self.output {
            return bad("input and output signals must differ".into());
        }
        for g in &self.groups {
            if g.a.is_zero() && g.b.is_zero() {
                return bad(format!("group at s^{} is identically zero", g.tag));
            }
        }
        let tag_syms: BTreeSet<_> = self.tag_symbols().into_iter().collect();
        let mut seen_groups = BTreeSet::new();
        for t in &self.theta2 {
            if tag_syms.contains(t) {
                return bad(format!("order {t} cannot be a common factor"));
            }
            let owners: Vec<usize> = (0..self.groups.len())
                .filter(|&j| self.groups[j].symbols().contains(t))
                .collect();
            let [j] = owners[..] else {
                return bad(format!("{t} must appear in exactly one group"));
            };
            let g = &self.groups[j];
            if g.tag.as_integer().is_some() {
                return bad(format!("{t} multiplies an integer-order group"));
            }
            let m = Monomial::var(t.clone());
            if !g.coeffs().all(|(_, c)| {
                c.div_monomial(&m)
                    .is_some_and(|q| !q.contains(t))
            }) {
                return bad(format!("{t} is not a simple common factor of its group"));
            }
            if !seen_groups.insert(j) {
                return bad(format!("group at s^{} has two common factors", g.tag));
            }
        }
        if let Some(n) = &self.normalize_by {
            if !self.symbols().contains(n) || tag_syms.contains(n) || self.theta2.contains(n) {
                return bad(format!("cannot normalise by {n}"));
            }
        }
        if self.regime != Regime::Homogeneous && !tag_syms.is_empty() && self.order_bound.is_none()
        {
            return bad("initial-value handling with unknown orders needs an order bound".into());
        }
        Ok(())
    }

    /// The grouped operational form, nothing divided out.
    pub fn row0(&self) -> FracOpExpr {
        let mut row0 = FracOpExpr::new();
        for g in &self.groups {
            row0.add_slot(g.tag.clone(), &self.group_expr(g));
        }
        row0
    }

    fn group_expr(&self, g: &Group) -> OpExpr {
        &g.a.apply(&self.output) - &g.b.apply(&self.input)
    }

    /// Where initial-value constants enter: `(tag, power of s)`.
    fn init_locations(&self) -> BTreeSet<(Tag, i32)> {
        let mut out = BTreeSet::new();
        for g in &self.groups {
            let powers: BTreeSet<i32> = g.coeffs().map(|(k, _)| k).collect();
            for k in powers {
                match &g.tag {
                    Tag::Known(q) if q.is_integer() => {
                        let p = k + q.to_i32().unwrap_or(0);
                        out.extend((0..p).map(|i| (Tag::zero(), i)));
                    }
                    tag => {
                        let n = match tag {
                            Tag::Known(q) => {
                                let o = Rational::from_integer(k.into()) + q;
                                if o <= Rational::zero() {
                                    0
                                } else {
                                    o.ceil().to_i32().unwrap_or(0)
                                }
                            }
                            Tag::Symbol(_) => {
                                (k + self.order_bound.unwrap_or(1) as i32).max(0)
                            }
                        };
                        match self.convention {
                            Convention::RiemannLiouville => {
                                out.extend((0..n).map(|i| (Tag::zero(), i)));
                            }
                            Convention::Caputo => {
                                out.extend((0..n).map(|i| (tag.clone(), k - 1 - i)));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Stage 1: normalisation, Θ₂ division, integer-order folding and the
    /// regime-dependent treatment of initial values.
    pub fn prepare(&self) -> Result<Prepared> {
        self.validate()?;
        let mut theta2 = Vec::new();
        let mut row0 = FracOpExpr::new();
        for g in &self.groups {
            let mut e = self.group_expr(g);
            if let Some(n) = &self.normalize_by {
                e = e.map_coeffs(|c| c.substitute(n, &Rational::from_integer(1.into())));
            }
            if let Some(t) = self.theta2.iter().find(|t| g.symbols().contains(t)) {
                e = e.div_monomial(&Monomial::var(t.clone())).expect("validated factor");
                theta2.push((g.tag.clone(), t.clone()));
            }
            row0.add_slot(g.tag.clone(), &e);
        }
        let mut row0 = row0.fold_integer_tags();
        let symbols = self.symbols();

        let mut constants = Vec::new();
        let locations = self.init_locations();
        if self.regime != Regime::Homogeneous && !locations.is_empty() {
            let tags: Vec<Tag> = {
                let mut t = row0.tags();
                t.extend(locations.iter().map(|(t, _)| t.clone()));
                t.sort();
                t.dedup();
                t
            };
            let mut by_slot: BTreeMap<&Tag, Vec<i32>> = BTreeMap::new();
            for (tag, q) in &locations {
                by_slot.entry(tag).or_default().push(*q);
            }
            for (tag, mut qs) in by_slot {
                qs.sort_unstable_by(|a, b| b.cmp(a));
                let slot = tags.iter().position(|t| t == tag).expect("collected");
                for (n, q) in qs.into_iter().enumerate() {
                    let c = ParamSymbol::new(format!("c_{slot}_{}", n + 1));
                    if symbols.contains(&c) {
                        return Err(Error::DegenerateModel(format!(
                            "parameter name {c} is reserved for initial values"
                        )));
                    }
                    row0.add_slot(tag.clone(), &OpExpr::constant(ParamPoly::symbol(c.clone()), q));
                    constants.push((tag.clone(), q, c));
                }
            }
        }

        let stage2_row0 = match self.regime {
            Regime::EliminateInit if !constants.is_empty() => {
                let mut r = match self.convention {
                    Convention::RiemannLiouville => {
                        let qmin = constants.iter().map(|(_, q, _)| *q).min().unwrap_or(0);
                        let qmax = constants.iter().map(|(_, q, _)| *q).max().unwrap_or(0);
                        let mut r = row0.map_slots(|_, e| e.shift(-qmin.min(0)));
                        for _ in 0..=(qmax - qmin.min(0)) {
                            r = r.dds();
                        }
                        r
                    }
                    Convention::Caputo => {
                        let mut r = row0.clone();
                        for (tag, q, _) in &constants {
                            let beta = &tag.as_poly() + &ParamPoly::int((*q).into());
                            r = r.euler_shift(&beta);
                        }
                        r
                    }
                };
                if let Some((_, _, c)) = constants.iter().find(|(_, _, c)| r.contains_symbol(c)) {
                    return Err(Error::DegenerateModel(format!(
                        "initial-value constant {c} survived elimination"
                    )));
                }
                r = drop_zero_slots(&r);
                r
            }
            _ => row0.clone(),
        };

        let tag_symbols = self.tag_symbols();
        let theta2_syms: BTreeSet<_> = self.theta2.iter().cloned().collect();
        let mut theta1: Vec<ParamSymbol> = tag_symbols.clone();
        theta1.extend(symbols.iter().filter(|s| {
            !tag_symbols.contains(s)
                && !theta2_syms.contains(s)
                && self.normalize_by.as_ref() != Some(s)
        }).cloned());
        let recover = self.regime != Regime::EliminateInit || constants.is_empty();
        if self.regime == Regime::IdentifyInit {
            theta1.extend(constants.iter().map(|(_, _, c)| c.clone()));
        }
        Ok(Prepared {
            row0,
            stage2_row0,
            theta1,
            theta2: if recover { theta2 } else { Vec::new() },
            unrecovered: if recover { Vec::new() } else { self.theta2.clone() },
            output: self.output.clone(),
            input: self.input.clone(),
        })
    }
}

fn drop_zero_slots(r: &FracOpExpr) -> FracOpExpr {
    let mut out = FracOpExpr::new();
    for (t, e) in r.slots() {
        if !e.is_zero() {
            out.add_slot(t.clone(), e);
        }
    }
    out
}

/// A model after stage 1, ready for elimination.
#[derive(Clone, Debug)]
pub struct Prepared {
    /// Grouped form with Θ₂ factors divided out and identified initial
    /// constants in place.
    pub row0: FracOpExpr,
    /// The equation whose fractional powers are eliminated.
    pub stage2_row0: FracOpExpr,
    /// Unknowns surviving elimination, in report order.
    pub theta1: Vec<ParamSymbol>,
    /// Common factor per group, recovered in stage 3.
    pub theta2: Vec<(Tag, ParamSymbol)>,
    /// Θ₂ symbols that cannot be recovered (initial values eliminated).
    pub unrecovered: Vec<ParamSymbol>,
    pub output: SignalId,
    pub input: SignalId,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcalc::eliminate;

    fn sym(s: &str) -> ParamPoly {
        ParamPoly::symbol(ParamSymbol::new(s))
    }

    #[test]
    fn voigt_preparation() {
        let p = ModelSpec::voigt().prepare().unwrap();
        assert_eq!(p.theta1, vec![ParamSymbol::new("alpha"), ParamSymbol::new("E0")]);
        assert_eq!(p.theta2, vec![(Tag::symbol("alpha"), ParamSymbol::new("E1"))]);
        let eps = OpExpr::signal("eps");
        assert_eq!(p.row0.slot(&Tag::symbol("alpha")), Some(&-&eps));
        assert_eq!(p.row0, p.stage2_row0);
    }

    #[test]
    fn validation_errors() {
        let g = |t: &str, a: &str, b: &str| Group::parse(t, a, b).unwrap();
        assert!(ModelSpec::new(vec![]).validate().is_err());
        assert!(ModelSpec::new(vec![g("alpha", "1", "b")]).validate().is_err());
        let mut m = ModelSpec::new(vec![g("0", "1", "b0"), g("alpha", "0", "E1*b0")]);
        m.theta2 = vec![ParamSymbol::new("b0")];
        assert!(m.validate().is_err());
        let mut m = ModelSpec::new(vec![g("0", "1", "E0"), g("alpha", "0", "E1^2")]);
        m.theta2 = vec![ParamSymbol::new("E1")];
        assert!(m.validate().is_err());
        let m = ModelSpec::new(vec![g("0", "1", "E0"), g("beta", "0", "0")]);
        assert!(matches!(m.validate(), Err(Error::DegenerateModel(_))));
        let m = ModelSpec::voigt().with_regime(Convention::Caputo, Regime::IdentifyInit);
        assert!(m.validate().is_ok());
        let mut m = m;
        m.order_bound = None;
        assert!(m.validate().is_err());
    }

    #[test]
    fn rl_identify_adds_constant_to_integer_slot() {
        let m = ModelSpec::voigt().with_regime(Convention::RiemannLiouville, Regime::IdentifyInit);
        let p = m.prepare().unwrap();
        let c = ParamSymbol::new("c_0_1");
        assert!(p.theta1.contains(&c));
        let slot0 = p.row0.slot(&Tag::zero()).unwrap();
        assert_eq!(slot0.coeff(&crate::opcalc::TermKey::new(0, vec![])), Some(&sym("c_0_1")));
    }

    #[test]
    fn caputo_identify_adds_constant_under_fractional_power() {
        let m = ModelSpec::voigt().with_regime(Convention::Caputo, Regime::IdentifyInit);
        let p = m.prepare().unwrap();
        let slot = p.row0.slot(&Tag::symbol("alpha")).unwrap();
        assert_eq!(slot.coeff(&crate::opcalc::TermKey::new(-1, vec![])), Some(&sym("c_1_1")));
    }

    #[test]
    fn eliminate_regimes_remove_constants() {
        for conv in [Convention::RiemannLiouville, Convention::Caputo] {
            let p = ModelSpec::voigt()
                .with_regime(conv, Regime::EliminateInit)
                .prepare()
                .unwrap();
            assert!(p.theta2.is_empty());
            let e = eliminate(&p.stage2_row0).unwrap();
            let syms: BTreeSet<_> = e
                .equation
                .monomials()
                .iter()
                .flat_map(|m| m.symbols().cloned().collect::<Vec<_>>())
                .collect();
            assert_eq!(
                syms,
                [ParamSymbol::new("E0"), ParamSymbol::new("alpha")].into_iter().collect()
            );
        }
    }

    #[test]
    fn integer_model_folds_into_one_group() {
        let m = ModelSpec::new(vec![Group::parse("0", "a1*s + a0", "b0").unwrap()]);
        let p = m.prepare().unwrap();
        assert_eq!(p.row0.len(), 1);
        let mut m = m;
        m.normalize_by = Some(ParamSymbol::new("a1"));
        let p = m.prepare().unwrap();
        assert_eq!(p.theta1, vec![ParamSymbol::new("a0"), ParamSymbol::new("b0")]);
    }
}
