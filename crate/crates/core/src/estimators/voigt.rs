//! The generalized Voigt model `σ = E0 ε + E1 D^α ε`.
//!
//! Eliminating `s^α` from `σ̂ = E0 ε̂ + E1 s^α ε̂` gives
//! `α(−∫ ε⋆σ) + αE0 ∫ ε⋆ε = ε⋆(tσ) − (tε)⋆σ`, linear in `(α, αE0)`.
//! Further equations come from integrating it again; `E1` then follows from
//! `E1 J^{1−α}ε = ∫σ − E0 ∫ε`.

use nalgebra::{DMatrix, DVector};

use super::general::{back_solve, identify_general, Regressors};
use super::lsq;
use super::model::{ModelSpec, Regime};
use super::result::IdentResult;
use super::IdentOptions;
use crate::error::{Error, Result};
use crate::fracops::{frac_integral_at, Convention};
use crate::opcalc::{Lowered, Monomial, ParamSymbol};
use crate::signals::{convolve, repeated_integral, t_weight, SampledSignal};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum InitMode {
    /// Estimate the initial-value term along with the model parameters.
    Identify,
    /// Eliminate it; only `α` and `E0` are returned.
    Eliminate,
}

fn alpha_sym() -> ParamSymbol {
    ParamSymbol::new("alpha")
}

fn e0_sym() -> ParamSymbol {
    ParamSymbol::new("E0")
}

/// The hand-written regressors: columns `α`, `αE0`, and the parameter-free
/// entry, for equations `j = 0..=n_extra`.
pub fn voigt_regressors(
    eps: &SampledSignal,
    sigma: &SampledSignal,
    n_extra: u32,
) -> Result<Regressors> {
    eps.check_grid(sigma)?;
    let a = Monomial::var(alpha_sym());
    let ae0 = Monomial::from_powers([(alpha_sym(), 1), (e0_sym(), 1)]);
    let es = convolve(eps, sigma)?;
    let ee = convolve(eps, eps)?;
    // ε⋆(−tσ) − (−tε)⋆σ
    let free = convolve(eps, &t_weight(sigma, 1))?.axpy(-1.0, &convolve(&t_weight(eps, 1), sigma)?)?;
    let mut equations = Vec::new();
    for j in 0..=n_extra {
        let mut eq = Lowered::new();
        eq.insert(a.clone(), -&repeated_integral(&es, 1 + j)?);
        eq.insert(ae0.clone(), repeated_integral(&ee, 1 + j)?);
        let f = if j == 0 { free.clone() } else { repeated_integral(&free, j)? };
        eq.insert(Monomial::one(), f);
        equations.push(eq);
    }
    Ok(Regressors {
        columns: vec![a, ae0],
        equations,
    })
}

/// Homogeneous Voigt identification (`ε(0) = 0`) from the hand-written
/// equations.
pub fn identify_voigt_hom(
    eps: &SampledSignal,
    sigma: &SampledSignal,
    opts: &IdentOptions,
) -> Result<IdentResult> {
    let n_extra = opts.n_extra.unwrap_or(4);
    let regs = voigt_regressors(eps, sigma, n_extra)?;
    let m = opts.theta2_extra;
    let int_sigma = (1..=m + 1).map(|j| repeated_integral(sigma, j)).collect::<Result<Vec<_>>>()?;
    let int_eps = (1..=m + 1).map(|j| repeated_integral(eps, j)).collect::<Result<Vec<_>>>()?;
    let indices = opts.eval_indices(eps.len(), eps.dt())?;
    let symbols = [alpha_sym(), e0_sym()];

    let mut times = Vec::new();
    let mut trajectories = Vec::new();
    let mut coherence = Vec::new();
    let mut min_sv = Vec::new();
    let mut last_good = None;
    let mut best_sv = 0.0f64;
    for (k, &i) in indices.iter().enumerate() {
        let sys = regs.system_at(i);
        let sol = lsq::solve(&sys.matrix, &sys.rhs, opts.min_rcond);
        best_sv = best_sv.max(sol.min_sv);
        times.push(sys.time);
        min_sv.push(sol.min_sv);
        if sol.is_singular() {
            trajectories.push(vec![f64::NAN; 3]);
            coherence.push(f64::NAN);
            continue;
        }
        let (v, resid) = back_solve(&regs.columns, &sol.x, &symbols);
        let (alpha, e0) = (v[&alpha_sym()], v[&e0_sym()]);
        let e1 = if alpha > 0.0 && alpha <= 1.0 {
            e1_at(eps, &int_sigma, &int_eps, alpha, e0, i, opts.min_rcond)?
        } else {
            f64::NAN
        };
        let row = vec![alpha, e0, e1];
        if row.iter().all(|x| x.is_finite()) {
            last_good = Some(k);
        }
        trajectories.push(row);
        coherence.push(resid);
    }
    let final_index = last_good.ok_or(Error::Singular { smallest_sv: best_sv })?;
    let result = IdentResult {
        names: vec!["alpha".into(), "E0".into(), "E1".into()],
        times,
        trajectories,
        coherence,
        min_sv,
        final_index,
        coherence_tol: opts.coherence_tol,
        warnings: Vec::new(),
    };
    Ok(flag_alpha(result))
}

/// Least-squares `E1` from `E1 J^{1+j−α}ε = J^{1+j}σ − E0 J^{1+j}ε`,
/// `j = 0..int_sigma.len()`. One equation reproduces the direct quotient.
fn e1_at(
    eps: &SampledSignal,
    int_sigma: &[SampledSignal],
    int_eps: &[SampledSignal],
    alpha: f64,
    e0: f64,
    i: usize,
    min_rcond: f64,
) -> Result<f64> {
    let rows = int_sigma.len();
    let mut a = DMatrix::zeros(rows, 1);
    let mut b = DVector::zeros(rows);
    let t = eps.time(i);
    let mut w = 1.0;
    for j in 0..rows {
        let order = 1.0 + j as f64 - alpha;
        a[(j, 0)] = if order == 0.0 {
            eps.values()[i]
        } else {
            frac_integral_at(eps, order, i)?
        };
        b[j] = int_sigma[j].values()[i] - e0 * int_eps[j].values()[i];
        a[(j, 0)] *= w;
        b[j] *= w;
        w *= (j + 1) as f64 / t;
    }
    Ok(lsq::solve_scaled(&a, &b, min_rcond, false).x[0])
}

fn flag_alpha(mut r: IdentResult) -> IdentResult {
    if let Some(a) = r.estimate("alpha") {
        if !(a > 0.0 && a < 1.0) {
            r.warnings
                .push(format!("alpha = {a} outside (0, 1): data inconsistent with the model"));
        }
    }
    r
}

fn inhom(
    eps: &SampledSignal,
    sigma: &SampledSignal,
    convention: Convention,
    mode: InitMode,
    opts: &IdentOptions,
    constant: (&str, &str),
) -> Result<IdentResult> {
    let regime = match mode {
        InitMode::Identify => Regime::IdentifyInit,
        InitMode::Eliminate => Regime::EliminateInit,
    };
    let model = ModelSpec::voigt().with_regime(convention, regime);
    let mut r = identify_general(&model, eps, sigma, opts)?;
    r.rename(constant.0, constant.1);
    r.warnings.retain(|w| !w.contains("not identifiable"));
    Ok(flag_alpha(r))
}

/// Riemann–Liouville Voigt with a nonzero `J^{1−α}ε(0+)`.
///
/// `Identify` returns `alpha`, `E0`, `p = E1·J^{1−α}ε(0+)` and `E1`;
/// `Eliminate` returns `alpha` and `E0` from the overparametrized fit.
pub fn identify_voigt_inhom_rl(
    eps: &SampledSignal,
    sigma: &SampledSignal,
    mode: InitMode,
    opts: &IdentOptions,
) -> Result<IdentResult> {
    inhom(eps, sigma, Convention::RiemannLiouville, mode, opts, ("c_0_1", "p"))
}

/// Caputo Voigt with a nonzero `ε(0)`.
///
/// `Identify` returns `alpha`, `E0`, `eps0` and `E1`; `Eliminate` returns
/// `alpha` and `E0`.
pub fn identify_voigt_inhom_caputo(
    eps: &SampledSignal,
    sigma: &SampledSignal,
    mode: InitMode,
    opts: &IdentOptions,
) -> Result<IdentResult> {
    inhom(eps, sigma, Convention::Caputo, mode, opts, ("c_1_1", "eps0"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{test_signal, voigt_forward, SignalKind, VoigtParams};
    use approx::assert_relative_eq;

    const DT: f64 = 0.00125;

    fn data(kind: SignalKind) -> (SampledSignal, SampledSignal) {
        let eps = test_signal(&kind, 5.0, DT).unwrap();
        let sigma = voigt_forward(&eps, &VoigtParams::homogeneous(0.5, 2.0, 1.0)).unwrap();
        (eps, sigma)
    }

    #[test]
    fn ramp_recovers_parameters() {
        let (eps, sigma) = data(SignalKind::Ramp { slope: 1.0 });
        let r = identify_voigt_hom(&eps, &sigma, &IdentOptions::default()).unwrap();
        assert_eq!(r.final_time(), 5.0);
        for (name, truth) in [("alpha", 0.5), ("E0", 2.0), ("E1", 1.0)] {
            assert_relative_eq!(r.estimate(name).unwrap(), truth, max_relative = 1e-2);
        }
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn zero_signals_are_singular() {
        let z = SampledSignal::zeros(DT, 801).unwrap();
        assert!(matches!(
            identify_voigt_hom(&z, &z, &IdentOptions::default()),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn round_trip_all_signal_kinds() {
        for kind in [
            SignalKind::Ramp { slope: 1.0 },
            SignalKind::Sine { amplitude: 1.0, omega: 1.0 },
            SignalKind::SmoothStep { rise: 2.0 },
            SignalKind::PrbsSmoothed { hold: 0.5, seed: 7 },
        ] {
            let (eps, sigma) = data(kind.clone());
            let r = identify_voigt_hom(&eps, &sigma, &IdentOptions::default()).unwrap();
            for (name, truth) in [("alpha", 0.5), ("E0", 2.0), ("E1", 1.0)] {
                let est = r.estimate(name).unwrap();
                assert!((est - truth).abs() < 1e-2 * truth, "{kind:?} {name} {est}");
            }
        }
    }

    #[test]
    fn scaling_sigma_scales_moduli() {
        let (eps, sigma) = data(SignalKind::Sine { amplitude: 1.0, omega: 1.0 });
        let opts = IdentOptions::default();
        let base = identify_voigt_hom(&eps, &sigma, &opts).unwrap();
        let scaled = identify_voigt_hom(&eps, &sigma.scale(3.0), &opts).unwrap();
        assert_relative_eq!(
            scaled.estimate("alpha").unwrap(),
            base.estimate("alpha").unwrap(),
            max_relative = 1e-6
        );
        for name in ["E0", "E1"] {
            assert_relative_eq!(
                scaled.estimate(name).unwrap(),
                3.0 * base.estimate(name).unwrap(),
                max_relative = 1e-6
            );
        }
    }
}
