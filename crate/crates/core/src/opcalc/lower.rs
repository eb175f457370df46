//! Lowering of normalised operational expressions to sampled signals.
//!
//! Three rules suffice: a product of operators is the convolution of the
//! time functions, the `j`-th `s`-derivative of a signal is `(−t)^j` times the
//! signal, and `s^{−k}` is the `k`-fold integral with kernel
//! `(t−τ)^{k−1}/(k−1)!`.

use std::collections::{BTreeMap, HashMap};

use super::expr::{Factor, OpExpr, SignalId, TermKey};
use super::poly::{rat_to_f64, Monomial};
use crate::error::{Error, Result};
use crate::signals::{convolve, repeated_integral, t_weight, SampledSignal};

/// Numeric signals bound to the symbols of an expression.
pub type Bindings = HashMap<SignalId, SampledSignal>;

/// One lowered equation: the time function multiplying each parameter
/// monomial. The equation reads `Σ_m m · lowered[m] = 0`.
pub type Lowered = BTreeMap<Monomial, SampledSignal>;

/// Lowers `e` term by term and accumulates per parameter monomial.
pub fn lower(e: &OpExpr, bindings: &Bindings) -> Result<Lowered> {
    lower_with(&mut Lowering::new(bindings)?, e)
}

/// Lowers several expressions sharing one cache of convolution products.
pub fn lower_many(es: &[OpExpr], bindings: &Bindings) -> Result<Vec<Lowered>> {
    let mut ctx = Lowering::new(bindings)?;
    es.iter().map(|e| lower_with(&mut ctx, e)).collect()
}

/// The convolution of the `t`-weighted factors of `key`, ignoring its power
/// of `s`. Empty factor lists are rejected.
pub fn lower_product(key: &TermKey, bindings: &Bindings) -> Result<SampledSignal> {
    if key.factors.is_empty() {
        return Err(Error::FreeConstant);
    }
    Lowering::new(bindings)?.product(&key.factors)
}

fn lower_with(ctx: &mut Lowering<'_>, e: &OpExpr) -> Result<Lowered> {
    let mut out = Lowered::new();
    for (key, coeff) in e.terms() {
        let sig = ctx.term(key)?;
        for (m, q) in coeff.terms() {
            let q = rat_to_f64(q);
            match out.get_mut(m) {
                Some(acc) => *acc = acc.axpy(q, &sig)?,
                None => {
                    out.insert(m.clone(), sig.scale(q));
                }
            }
        }
    }
    Ok(out)
}

/// Lowers a single structural term (coefficient 1).
pub fn lower_term(key: &TermKey, bindings: &Bindings) -> Result<SampledSignal> {
    Lowering::new(bindings)?.term(key)
}

/// Extra equations by repeated integration of a lowered equation:
/// equation `j` applies `repeated_integral(·, j)` to every entry,
/// `j = 0..=n_extra`.
pub fn generate_equations(base: &Lowered, n_extra: u32) -> Result<Vec<Lowered>> {
    let mut out = vec![base.clone()];
    for j in 1..=n_extra {
        let mut eq = Lowered::new();
        for (m, sig) in base {
            eq.insert(m.clone(), repeated_integral(sig, j)?);
        }
        out.push(eq);
    }
    Ok(out)
}

struct Lowering<'a> {
    bindings: &'a Bindings,
    grid: Option<(f64, usize)>,
    products: HashMap<Vec<Factor>, SampledSignal>,
}

impl<'a> Lowering<'a> {
    fn new(bindings: &'a Bindings) -> Result<Self> {
        let mut it = bindings.values();
        let grid = match it.next() {
            None => None,
            Some(first) => {
                for other in it {
                    first.check_grid(other)?;
                }
                Some((first.dt(), first.len()))
            }
        };
        Ok(Self {
            bindings,
            grid,
            products: HashMap::new(),
        })
    }

    fn factor(&self, f: &Factor) -> Result<SampledSignal> {
        let sig = self
            .bindings
            .get(&f.signal)
            .ok_or_else(|| Error::UnboundSignal(f.signal.name().to_owned()))?;
        Ok(t_weight(sig, f.order))
    }

    /// Convolution of a sorted factor list, memoised on every prefix.
    fn product(&mut self, factors: &[Factor]) -> Result<SampledSignal> {
        if let Some(p) = self.products.get(factors) {
            return Ok(p.clone());
        }
        let last = self.factor(&factors[factors.len() - 1])?;
        let p = if factors.len() == 1 {
            last
        } else {
            let head = self.product(&factors[..factors.len() - 1])?;
            convolve(&head, &last)?
        };
        self.products.insert(factors.to_vec(), p.clone());
        Ok(p)
    }

    fn term(&mut self, key: &TermKey) -> Result<SampledSignal> {
        if key.s_power > 0 {
            return Err(Error::NotProper(key.s_power));
        }
        let k = key.s_power.unsigned_abs();
        if key.factors.is_empty() {
            if k == 0 {
                return Err(Error::FreeConstant);
            }
            let (dt, n) = self.grid.ok_or_else(|| {
                Error::InvalidArgument("no bound signal fixes the grid".into())
            })?;
            let fact: f64 = (1..k).map(f64::from).product();
            return SampledSignal::from_fn(dt, n, |t| t.powi(k as i32 - 1) / fact);
        }
        let p = self.product(&key.factors)?;
        if k == 0 {
            Ok(p)
        } else {
            repeated_integral(&p, k)
        }
    }
}
