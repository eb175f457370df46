//! The general grouped-model pipeline.

use std::collections::{BTreeSet, HashMap};

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::gamma;

use super::lsq;
use super::model::{ModelSpec, Prepared};
use super::result::IdentResult;
use super::IdentOptions;
use crate::error::{Error, Result};
use crate::fracops::frac_integral_at;
use crate::opcalc::{
    eliminate, lower_many, lower_product, Bindings, Elimination, Factor, Lowered, Monomial,
    OpExpr, ParamSymbol, SignalId, Tag, TermKey,
};
use crate::signals::{repeated_integral, SampledSignal};

/// Lowered identification equations `Σ_m m · equations[e][m] = 0`, one per
/// extra `s^{−1}` multiplication.
#[derive(Clone, Debug)]
pub struct Regressors {
    /// Unknown monomials (the parameter-free monomial excluded).
    pub columns: Vec<Monomial>,
    pub equations: Vec<Lowered>,
}

/// The stacked linear system at one evaluation time.
#[derive(Clone, Debug)]
pub struct RegressorSystem {
    pub labels: Vec<Monomial>,
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub time: f64,
}

impl Regressors {
    pub fn len(&self) -> usize {
        self.equations[0].values().next().map_or(0, SampledSignal::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dt(&self) -> f64 {
        self.equations[0].values().next().map_or(0.0, SampledSignal::dt)
    }

    /// Rows are equations, columns the unknown monomials, right-hand side
    /// minus the parameter-free entry.
    pub fn system_at(&self, i: usize) -> RegressorSystem {
        let rows = self.equations.len();
        let cols = self.columns.len();
        let one = Monomial::one();
        let matrix = DMatrix::from_fn(rows, cols, |r, c| {
            self.equations[r].get(&self.columns[c]).map_or(0.0, |s| s.values()[i])
        });
        let rhs = DVector::from_fn(rows, |r, _| {
            -self.equations[r].get(&one).map_or(0.0, |s| s.values()[i])
        });
        RegressorSystem {
            labels: self.columns.clone(),
            matrix,
            rhs,
            time: i as f64 * self.dt(),
        }
    }
}

pub(crate) fn bindings(model: &ModelSpec, u: &SampledSignal, y: &SampledSignal) -> Result<Bindings> {
    u.check_grid(y)?;
    Ok(signal_map(&[(&model.input, u), (&model.output, y)]))
}

pub(crate) fn signal_map(pairs: &[(&SignalId, &SampledSignal)]) -> Bindings {
    pairs.iter().map(|(k, v)| ((*k).clone(), (*v).clone())).collect()
}

/// The eliminated, normalised equation of a prepared model.
pub(crate) fn elimination(prep: &Prepared) -> Result<Elimination> {
    let e = eliminate(&prep.stage2_row0)?;
    if e.equation.coeff(&TermKey::new(0, vec![])).is_some() {
        return Err(Error::FreeConstant);
    }
    Ok(e)
}

pub(crate) fn regressors_prepared(
    prep: &Prepared,
    bindings: &Bindings,
    n_extra: Option<u32>,
) -> Result<Regressors> {
    let f = elimination(prep)?.equation;
    let monomials = f.monomials();
    if !monomials.contains(&Monomial::one()) {
        return Err(Error::DegenerateModel(
            "eliminated equation has no parameter-free term; fix one coefficient with normalize_by"
                .into(),
        ));
    }
    let columns: Vec<Monomial> = monomials.into_iter().filter(|m| !m.is_one()).collect();
    if columns.is_empty() {
        return Err(Error::DegenerateModel("eliminated equation has no unknowns".into()));
    }
    let n_extra = n_extra.unwrap_or(columns.len() as u32 + 2);
    let shifted: Vec<OpExpr> = (0..=n_extra).map(|j| f.shift(-(j as i32))).collect();
    let equations = lower_many(&shifted, bindings)?;
    Ok(Regressors { columns, equations })
}

/// Stage-2 regressor signals of `model` for input `u` and output `y`.
pub fn regressor_signals(
    model: &ModelSpec,
    u: &SampledSignal,
    y: &SampledSignal,
    opts: &IdentOptions,
) -> Result<Regressors> {
    regressors_prepared(&model.prepare()?, &bindings(model, u, y)?, opts.n_extra)
}

/// Physical parameters from monomial estimates. Each symbol is taken from
/// the lowest-degree monomial in which it is the only unsolved factor; the
/// remaining monomials give the coherence residual
/// `max |θ̂_m − Π θ̂^e| / max_m |θ̂_m|`.
pub(crate) fn back_solve(
    columns: &[Monomial],
    est: &[f64],
    symbols: &[ParamSymbol],
) -> (HashMap<ParamSymbol, f64>, f64) {
    let mut solved: HashMap<ParamSymbol, f64> = HashMap::new();
    let mut used = vec![false; columns.len()];
    'outer: loop {
        for (idx, m) in columns.iter().enumerate() {
            if used[idx] {
                continue;
            }
            let open: Vec<_> = m.symbols().filter(|s| !solved.contains_key(*s)).collect();
            if open.len() != 1 || m.exponent(open[0]) != 1 {
                continue;
            }
            let s = open[0].clone();
            let rest: f64 = m
                .powers()
                .iter()
                .filter(|(p, _)| *p != s)
                .map(|(p, e)| solved[p].powi(*e as i32))
                .product();
            if rest == 0.0 || !rest.is_finite() {
                continue;
            }
            solved.insert(s, est[idx] / rest);
            used[idx] = true;
            continue 'outer;
        }
        break;
    }
    let scale = est.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut residual = 0.0f64;
    for (idx, m) in columns.iter().enumerate() {
        if used[idx] {
            continue;
        }
        if let Some(pred) = m.eval(&solved) {
            if scale > 0.0 {
                residual = residual.max((est[idx] - pred).abs() / scale);
            }
        }
    }
    for s in symbols {
        solved.entry(s.clone()).or_insert(f64::NAN);
    }
    (solved, residual)
}

/// Fractional-integral lowering for stage 3, cached across times.
struct Theta2Stage<'a> {
    prep: &'a Prepared,
    bindings: &'a Bindings,
    dt: f64,
    products: HashMap<Vec<Factor>, SampledSignal>,
    integrals: HashMap<(Vec<Factor>, u32), SampledSignal>,
}

impl<'a> Theta2Stage<'a> {
    fn new(prep: &'a Prepared, bindings: &'a Bindings) -> Result<Self> {
        let dt = bindings
            .values()
            .next()
            .map(SampledSignal::dt)
            .ok_or_else(|| Error::InvalidArgument("no signals bound".into()))?;
        Ok(Self {
            prep,
            bindings,
            dt,
            products: HashMap::new(),
            integrals: HashMap::new(),
        })
    }

    fn product(&mut self, factors: &[Factor]) -> Result<&SampledSignal> {
        if !self.products.contains_key(factors) {
            let p = lower_product(&TermKey::new(0, factors.to_vec()), self.bindings)?;
            self.products.insert(factors.to_vec(), p);
        }
        Ok(&self.products[factors])
    }

    /// `J^γ` of the term's time function at index `i`.
    fn integral(&mut self, factors: &[Factor], gamma_: f64, i: usize) -> Result<f64> {
        let t = i as f64 * self.dt;
        if factors.is_empty() {
            return Ok(t.powf(gamma_ - 1.0) / gamma(gamma_));
        }
        if gamma_ < 1e-9 {
            return Ok(self.product(factors)?.values()[i]);
        }
        let k = gamma_.round();
        if (gamma_ - k).abs() < 1e-9 {
            let key = (factors.to_vec(), k as u32);
            if !self.integrals.contains_key(&key) {
                let p = self.product(factors)?.clone();
                self.integrals.insert(key.clone(), repeated_integral(&p, k as u32)?);
            }
            return Ok(self.integrals[&key].values()[i]);
        }
        frac_integral_at(self.product(factors)?, gamma_, i)
    }

    /// Solves for Θ₂ at index `i` given all other unknowns. NaN when the
    /// system is singular or an estimate is missing.
    fn solve_at(
        &mut self,
        i: usize,
        values: &HashMap<ParamSymbol, f64>,
        extra: u32,
        min_rcond: f64,
    ) -> Result<Vec<f64>> {
        let q = self.prep.theta2.len();
        let nan = vec![f64::NAN; q];
        let row0 = &self.prep.row0;
        let mut orders = Vec::new();
        for (tag, e) in row0.slots() {
            let Some(tau) = tag.value(values).filter(|v| v.is_finite()) else {
                return Ok(nan);
            };
            orders.push((tag.clone(), tau, e.clone()));
        }
        let max_o = orders
            .iter()
            .flat_map(|(_, tau, e)| e.terms().map(move |(k, _)| f64::from(k.s_power) + tau))
            .fold(f64::NEG_INFINITY, f64::max);
        let mut m = (max_o - 1e-9).ceil().max(0.0);
        let free_ok = |m: f64| {
            orders.iter().all(|(_, tau, e)| {
                e.terms()
                    .filter(|(k, _)| k.factors.is_empty())
                    .all(|(k, _)| m - f64::from(k.s_power) - tau > 1e-9)
            })
        };
        if !free_ok(m) {
            m += 1.0;
        }
        let neq = q + extra as usize;
        let mut a = DMatrix::zeros(neq, q);
        let mut b = DVector::zeros(neq);
        for eq in 0..neq {
            for (tag, tau, e) in &orders {
                let mut val = 0.0;
                for (key, coeff) in e.terms() {
                    let Some(c) = coeff.eval(values) else {
                        return Ok(nan);
                    };
                    let g = (m + eq as f64 - f64::from(key.s_power) - tau).max(0.0);
                    val += c * self.integral(&key.factors, g, i)?;
                }
                match self.prep.theta2.iter().position(|(t, _)| t == tag) {
                    Some(col) => a[(eq, col)] = val,
                    None => b[eq] -= val,
                }
            }
        }
        // J^{m+eq} grows like t^eq/eq!; rescale to comparable magnitudes.
        let t = i as f64 * self.dt;
        let mut w = 1.0;
        for eq in 0..neq {
            a.row_mut(eq).scale_mut(w);
            b[eq] *= w;
            w *= (eq + 1) as f64 / t;
        }
        let sol = lsq::solve_scaled(&a, &b, min_rcond, false);
        Ok(if sol.is_singular() { nan } else { sol.x })
    }
}

pub(crate) fn identify_prepared(
    prep: &Prepared,
    bindings: &Bindings,
    opts: &IdentOptions,
) -> Result<IdentResult> {
    let regs = regressors_prepared(prep, bindings, opts.n_extra)?;
    let indices = opts.eval_indices(regs.len(), regs.dt())?;
    let mut stage3 = if prep.theta2.is_empty() {
        None
    } else {
        Some(Theta2Stage::new(prep, bindings)?)
    };

    let mut names: Vec<String> = prep.theta1.iter().map(|s| s.name().to_owned()).collect();
    names.extend(prep.theta2.iter().map(|(_, s)| s.name().to_owned()));
    let mut warnings = Vec::new();
    if !prep.unrecovered.is_empty() {
        let list: Vec<_> = prep.unrecovered.iter().map(ParamSymbol::name).collect();
        warnings.push(format!(
            "{} not identifiable once initial values are eliminated",
            list.join(", ")
        ));
    }
    let in_eq: BTreeSet<ParamSymbol> =
        regs.columns.iter().flat_map(|m| m.symbols().cloned().collect::<Vec<_>>()).collect();
    for s in &prep.theta1 {
        if !in_eq.contains(s) {
            warnings.push(format!("{s} cancels from the eliminated equation"));
        }
    }

    let mut times = Vec::with_capacity(indices.len());
    let mut trajectories = Vec::with_capacity(indices.len());
    let mut coherence = Vec::with_capacity(indices.len());
    let mut min_sv = Vec::with_capacity(indices.len());
    let mut last_good = None;
    let mut best_sv = 0.0f64;
    for (k, &i) in indices.iter().enumerate() {
        let sys = regs.system_at(i);
        let sol = lsq::solve(&sys.matrix, &sys.rhs, opts.min_rcond);
        best_sv = best_sv.max(sol.min_sv);
        times.push(sys.time);
        min_sv.push(sol.min_sv);
        if sol.is_singular() {
            trajectories.push(vec![f64::NAN; names.len()]);
            coherence.push(f64::NAN);
            continue;
        }
        let (values, resid) = back_solve(&regs.columns, &sol.x, &prep.theta1);
        let mut row: Vec<f64> = prep.theta1.iter().map(|s| values[s]).collect();
        if let Some(st) = stage3.as_mut() {
            row.extend(st.solve_at(i, &values, opts.theta2_extra, opts.min_rcond)?);
        }
        if row.iter().all(|v| v.is_finite()) {
            last_good = Some(k);
        }
        trajectories.push(row);
        coherence.push(resid);
    }
    let final_index = last_good.ok_or(Error::Singular { smallest_sv: best_sv })?;
    let result = IdentResult {
        names,
        times,
        trajectories,
        coherence,
        min_sv,
        final_index,
        coherence_tol: opts.coherence_tol,
        warnings,
    };
    Ok(check_orders(result, prep))
}

fn check_orders(mut r: IdentResult, prep: &Prepared) -> IdentResult {
    for (tag, _) in prep.row0.slots() {
        if let Tag::Symbol(s) = tag {
            if let Some(v) = r.estimate(s.name()) {
                if v <= 0.0 {
                    r.warnings.push(format!("estimated order {s} = {v} is not positive"));
                }
            }
        }
    }
    if !r.is_coherent() {
        r.warnings.push(format!(
            "monomial coherence residual {:.3e} exceeds {:.1e}",
            r.final_coherence(),
            r.coherence_tol
        ));
    }
    r
}

/// Identifies all unknowns of `model` from input `u` and output `y`.
pub fn identify_general(
    model: &ModelSpec,
    u: &SampledSignal,
    y: &SampledSignal,
    opts: &IdentOptions,
) -> Result<IdentResult> {
    identify_prepared(&model.prepare()?, &bindings(model, u, y)?, opts)
}

/// Θ₂ at the last sample, given estimates of every other unknown.
pub fn recover_theta2(
    model: &ModelSpec,
    theta1_hat: &HashMap<ParamSymbol, f64>,
    u: &SampledSignal,
    y: &SampledSignal,
    opts: &IdentOptions,
) -> Result<Vec<(ParamSymbol, f64)>> {
    let prep = model.prepare()?;
    if prep.theta2.is_empty() {
        return Err(Error::InvalidArgument("model has no second-stage parameters".into()));
    }
    let b = bindings(model, u, y)?;
    let mut stage = Theta2Stage::new(&prep, &b)?;
    let x = stage.solve_at(u.len() - 1, theta1_hat, opts.theta2_extra, opts.min_rcond)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular { smallest_sv: 0.0 });
    }
    Ok(prep.theta2.iter().map(|(_, s)| s.clone()).zip(x).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::model::Group;
    use crate::simulate::{test_signal, voigt_forward, SignalKind, VoigtParams};
    use approx::assert_relative_eq;

    fn sine() -> SampledSignal {
        test_signal(&SignalKind::Sine { amplitude: 1.0, omega: 1.0 }, 5.0, 0.00125).unwrap()
    }

    #[test]
    fn back_solve_uses_lowest_degree() {
        let a = ParamSymbol::new("alpha");
        let e = ParamSymbol::new("E0");
        let cols = vec![
            Monomial::var(a.clone()),
            Monomial::from_powers([(a.clone(), 2)]),
            Monomial::from_powers([(a.clone(), 1), (e.clone(), 1)]),
        ];
        let (v, r) = back_solve(&cols, &[0.5, 0.25, 1.0], &[a.clone(), e.clone()]);
        assert_eq!(v[&a], 0.5);
        assert_eq!(v[&e], 2.0);
        assert_eq!(r, 0.0);
        let (_, r) = back_solve(&cols, &[0.5, 0.3, 1.0], &[a, e]);
        assert_relative_eq!(r, 0.05, max_relative = 1e-12);
    }

    #[test]
    fn voigt_through_general_pipeline() {
        let eps = sine();
        let sigma = voigt_forward(&eps, &VoigtParams::homogeneous(0.5, 2.0, 1.0)).unwrap();
        let r = identify_general(&ModelSpec::voigt(), &eps, &sigma, &IdentOptions::default())
            .unwrap();
        assert_eq!(r.names, vec!["alpha", "E0", "E1"]);
        assert_relative_eq!(r.estimate("alpha").unwrap(), 0.5, max_relative = 1e-2);
        assert_relative_eq!(r.estimate("E0").unwrap(), 2.0, max_relative = 1e-2);
        assert_relative_eq!(r.estimate("E1").unwrap(), 1.0, max_relative = 1e-2);
    }

    #[test]
    fn first_order_integer_model() {
        // ẏ + 2y = 3u, u = 1: y = 1.5 (1 − e^{−2t}).
        let u = SampledSignal::from_fn(0.00125, 4001, |_| 1.0).unwrap();
        let y = SampledSignal::from_fn(0.00125, 4001, |t| 1.5 * (1.0 - (-2.0 * t).exp())).unwrap();
        let mut m = ModelSpec::new(vec![Group::parse("0", "a1*s + a0", "b0").unwrap()]);
        m.normalize_by = Some(ParamSymbol::new("a1"));
        let r = identify_general(&m, &u, &y, &IdentOptions::default()).unwrap();
        assert_relative_eq!(r.estimate("a0").unwrap(), 2.0, max_relative = 1e-2);
        assert_relative_eq!(r.estimate("b0").unwrap(), 3.0, max_relative = 1e-2);

        m.normalize_by = None;
        assert!(matches!(
            identify_general(&m, &u, &y, &IdentOptions::default()),
            Err(Error::DegenerateModel(_))
        ));
    }

    #[test]
    fn zero_signals_are_singular() {
        let z = SampledSignal::zeros(0.01, 501).unwrap();
        assert!(matches!(
            identify_general(&ModelSpec::voigt(), &z, &z, &IdentOptions::default()),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn theta2_recovery_at_true_values() {
        let eps = sine();
        let sigma = voigt_forward(&eps, &VoigtParams::homogeneous(0.5, 2.0, 1.0)).unwrap();
        let vals: HashMap<_, _> =
            [(ParamSymbol::new("alpha"), 0.5), (ParamSymbol::new("E0"), 2.0)].into();
        let m = ModelSpec::voigt();
        let x = recover_theta2(&m, &vals, &eps, &sigma, &IdentOptions::default()).unwrap();
        assert_eq!(x[0].0, ParamSymbol::new("E1"));
        assert_relative_eq!(x[0].1, 1.0, max_relative = 5e-3);
        let mut m2 = m.clone();
        m2.theta2.clear();
        m2.groups[1] = Group::parse("alpha", "0", "E1").unwrap();
        assert!(recover_theta2(&m2, &vals, &eps, &sigma, &IdentOptions::default()).is_err());
    }
}
