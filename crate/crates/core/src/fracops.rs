//! Grünwald–Letnikov fractional integration and differentiation on the
//! signal grid.
//!
//! At grid time `t = i·dt` the sums run over `N = i` steps of width `dt`:
//!
//! ```text
//! J^α f(t) ≈ dt^α Σ_{k=0}^{N−1} A_{k+1}(α) f(t − k·dt)
//! D^α f(t) ≈ dt^−α Σ_{k=0}^{N}   A_{k+1}(−α) f(t − k·dt)
//! ```
//!
//! with `A_1 = 1`, `A_{k+1} = (k − 1 + α)/k · A_k`. Both schemes are first
//! order in `dt`.

use crate::error::{Error, Result};
use crate::signals::SampledSignal;

/// A non-negative differentiation/integration order together with the
/// integer `ν` satisfying `ν − 1 < α ≤ ν`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FracOrder {
    alpha: f64,
    nu: u32,
}

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "fractional order must be finite and >= 0, got {alpha}"
            )));
        }
        Ok(Self {
            alpha,
            nu: alpha.ceil() as u32,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn nu(&self) -> u32 {
        self.nu
    }

    pub fn is_integer(&self) -> bool {
        self.alpha.fract() == 0.0
    }
}

/// Derivative convention for inhomogeneous initial data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Convention {
    RiemannLiouville,
    Caputo,
}

/// The Grünwald–Letnikov coefficients `A_1..A_N` for order `alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct GLWeights {
    alpha: f64,
    coeffs: Vec<f64>,
}

impl GLWeights {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `A_1..A_N`; index 0 holds `A_1`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

/// Builds `A_1..A_n` by the stable product recursion. Negative `alpha`
/// gives the differentiation weights.
pub fn gl_weights(alpha: f64, n: usize) -> Result<GLWeights> {
    if n == 0 {
        return Err(Error::InvalidArgument("gl_weights requires N >= 1".into()));
    }
    let mut coeffs = Vec::with_capacity(n);
    let mut a = 1.0;
    coeffs.push(a);
    for k in 1..n {
        a *= (k as f64 - 1.0 + alpha) / k as f64;
        coeffs.push(a);
    }
    Ok(GLWeights { alpha, coeffs })
}

/// `J^α f` at every grid time. `alpha` must be strictly positive.
pub fn frac_integral(f: &SampledSignal, order: FracOrder) -> Result<SampledSignal> {
    if order.alpha() == 0.0 {
        return Err(Error::InvalidArgument(
            "order 0 is the identity; frac_integral expects alpha > 0".into(),
        ));
    }
    let w = gl_weights(order.alpha(), f.len())?;
    let scale = f.dt().powf(order.alpha());
    let v = f.values();
    let out = (0..v.len())
        .map(|i| scale * (0..i).map(|k| w.coeffs[k] * v[i - k]).sum::<f64>())
        .collect();
    Ok(f.with_values(out))
}

/// `J^α f` at the single grid index `i`, for callers sweeping `alpha`.
pub fn frac_integral_at(f: &SampledSignal, alpha: f64, i: usize) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "frac_integral_at expects alpha > 0, got {alpha}"
        )));
    }
    let v = f.values();
    let mut a = 1.0;
    let mut acc = 0.0;
    for k in 0..i {
        if k > 0 {
            a *= (k as f64 - 1.0 + alpha) / k as f64;
        }
        acc += a * v[i - k];
    }
    Ok(f.dt().powf(alpha) * acc)
}

/// GL derivative of order `alpha` at index `i` (includes the `f(0)` sample).
pub fn gl_derivative_at(f: &SampledSignal, alpha: f64, i: usize) -> f64 {
    let v = f.values();
    let mut a = 1.0;
    let mut acc = 0.0;
    for k in 0..=i {
        if k > 0 {
            a *= (k as f64 - 1.0 - alpha) / k as f64;
        }
        acc += a * v[i - k];
    }
    f.dt().powf(-alpha) * acc
}

fn gl_derivative(f: &SampledSignal, alpha: f64) -> Result<SampledSignal> {
    let w = gl_weights(-alpha, f.len())?;
    let scale = f.dt().powf(-alpha);
    let v = f.values();
    let out = (0..v.len())
        .map(|i| scale * (0..=i).map(|k| w.coeffs[k] * v[i - k]).sum::<f64>())
        .collect();
    Ok(f.with_values(out))
}

/// Fractional derivative of order `alpha` under the given convention.
///
/// Riemann–Liouville is the plain GL sum. Caputo subtracts the Taylor
/// polynomial built from `init = [f(0), f'(0), …, f^{(ν−1)}(0)]` before the
/// GL sum, so the two differ exactly by the discretised initial-value terms.
pub fn frac_derivative(
    f: &SampledSignal,
    order: FracOrder,
    convention: Convention,
    init: &[f64],
) -> Result<SampledSignal> {
    if order.alpha() == 0.0 {
        return Ok(f.clone());
    }
    match convention {
        Convention::RiemannLiouville => gl_derivative(f, order.alpha()),
        Convention::Caputo if order.is_integer() => gl_derivative(f, order.alpha()),
        Convention::Caputo => {
            let nu = order.nu() as usize;
            if init.len() < nu {
                return Err(Error::InvalidArgument(format!(
                    "Caputo derivative of order {} needs {nu} initial values, got {}",
                    order.alpha(),
                    init.len()
                )));
            }
            let shifted = f.with_values(
                f.values()
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        let t = f.time(i);
                        let mut fact = 1.0;
                        let mut taylor = 0.0;
                        for (m, c) in init[..nu].iter().enumerate() {
                            if m > 0 {
                                fact *= m as f64;
                            }
                            taylor += c * t.powi(m as i32) / fact;
                        }
                        v - taylor
                    })
                    .collect(),
            );
            gl_derivative(&shifted, order.alpha())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use statrs::function::gamma::gamma;

    fn grid(n: usize, horizon: f64, f: impl Fn(f64) -> f64) -> SampledSignal {
        SampledSignal::from_fn(horizon / (n - 1) as f64, n, f).unwrap()
    }

    #[test]
    fn order_bookkeeping() {
        assert_eq!(FracOrder::new(0.0).unwrap().nu(), 0);
        assert_eq!(FracOrder::new(0.5).unwrap().nu(), 1);
        assert_eq!(FracOrder::new(1.0).unwrap().nu(), 1);
        assert_eq!(FracOrder::new(1.2).unwrap().nu(), 2);
        assert!(FracOrder::new(-0.1).is_err());
    }

    #[test]
    fn weight_examples() {
        let w = gl_weights(0.5, 3).unwrap();
        assert_eq!(w.coeffs(), &[1.0, 0.5, 0.375]);
        let w = gl_weights(1.0, 20).unwrap();
        assert!(w.coeffs().iter().all(|&a| a == 1.0));
        for alpha in [0.0, 0.3, 1.7] {
            assert_eq!(gl_weights(alpha, 5).unwrap().coeffs()[0], 1.0);
        }
        assert!(gl_weights(0.5, 0).is_err());
    }

    #[test]
    fn weight_recursion_matches_gamma_ratios() {
        for alpha in [0.25, 0.5, 1.5] {
            let w = gl_weights(alpha, 10).unwrap();
            for (k, a) in w.coeffs().iter().enumerate() {
                let direct = gamma(k as f64 + alpha) / (gamma(alpha) * gamma(k as f64 + 1.0));
                assert_relative_eq!(*a, direct, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn weight_recursion_exact_in_rationals() {
        // Γ(k+α)/(Γ(α)Γ(k+1)) = α(α+1)…(α+k−1)/k!  for rational α.
        let alpha = BigRational::new(BigInt::from(1), BigInt::from(2));
        let mut rec = BigRational::from_integer(1.into());
        let mut recursion = vec![rec.clone()];
        for k in 1..10u32 {
            let k_r = BigRational::from_integer(k.into());
            rec = rec * (k_r.clone() - BigRational::from_integer(1.into()) + alpha.clone()) / k_r;
            recursion.push(rec.clone());
        }
        for (k, r) in recursion.iter().enumerate() {
            let mut num = BigRational::from_integer(1.into());
            for m in 0..k {
                num = num * (BigRational::from_integer((m as i64).into()) + alpha.clone());
            }
            let fact: BigInt = (1..=k as i64).map(BigInt::from).product();
            assert_eq!(*r, num / BigRational::from_integer(fact));
        }
        let w = gl_weights(0.5, 10).unwrap();
        for (a, r) in w.coeffs().iter().zip(&recursion) {
            let r = r.numer().to_string().parse::<f64>().unwrap()
                / r.denom().to_string().parse::<f64>().unwrap();
            assert_relative_eq!(*a, r, max_relative = 1e-15);
        }
    }

    #[test]
    fn integral_examples() {
        let one = grid(1001, 1.0, |_| 1.0);
        let j1 = frac_integral(&one, FracOrder::new(1.0).unwrap()).unwrap();
        assert!((j1.values()[1000] - 1.0).abs() < 2.0 * one.dt());

        let t = grid(4001, 1.0, |t| t);
        let jh = frac_integral(&t, FracOrder::new(0.5).unwrap()).unwrap();
        let exact = 1.0 / gamma(2.5);
        assert_relative_eq!(exact, 0.752253, max_relative = 1e-6);
        assert_relative_eq!(jh.values()[4000], exact, max_relative = 5e-3);

        let z = grid(100, 1.0, |_| 0.0);
        let jz = frac_integral(&z, FracOrder::new(0.7).unwrap()).unwrap();
        assert!(jz.values().iter().all(|&v| v == 0.0));
        assert!(frac_integral(&z, FracOrder::new(0.0).unwrap()).is_err());
    }

    #[test]
    fn single_point_matches_full_sweep() {
        let f = grid(301, 3.0, |t| t.sin());
        let full = frac_integral(&f, FracOrder::new(0.4).unwrap()).unwrap();
        for i in [0, 1, 17, 300] {
            assert_relative_eq!(
                frac_integral_at(&f, 0.4, i).unwrap(),
                full.values()[i],
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn integral_error_shrinks_with_n() {
        let exact = 1.0 / gamma(2.5);
        let errs: Vec<f64> = [251, 1001, 4001]
            .iter()
            .map(|&n| {
                let t = grid(n, 1.0, |t| t);
                let j = frac_integral(&t, FracOrder::new(0.5).unwrap()).unwrap();
                (j.values()[n - 1] - exact).abs()
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn derivative_examples() {
        let n = 4001;
        let t = grid(n, 1.0, |t| t);
        let d = frac_derivative(&t, FracOrder::new(0.5).unwrap(), Convention::RiemannLiouville, &[])
            .unwrap();
        assert_relative_eq!(d.values()[n - 1], 2.0 / std::f64::consts::PI.sqrt(), max_relative = 1e-3);

        let one = grid(n, 1.0, |_| 1.0);
        let d = frac_derivative(&one, FracOrder::new(0.5).unwrap(), Convention::RiemannLiouville, &[])
            .unwrap();
        assert_relative_eq!(d.values()[n - 1], 1.0 / std::f64::consts::PI.sqrt(), max_relative = 1e-3);

        let c = grid(n, 1.0, |_| 2.5);
        for alpha in [0.2, 0.5, 0.9] {
            let d = frac_derivative(&c, FracOrder::new(alpha).unwrap(), Convention::Caputo, &[2.5])
                .unwrap();
            assert!(d.values().iter().all(|&v| v == 0.0));
        }
        assert!(
            frac_derivative(&c, FracOrder::new(0.5).unwrap(), Convention::Caputo, &[]).is_err()
        );
    }

    #[test]
    fn caputo_and_rl_differ_by_initial_value_term() {
        // D_RL^α f − D_C^α f = f(0) t^{−α}/Γ(1−α) for α ∈ (0,1).
        let n = 2001;
        let f = grid(n, 2.0, |t| 0.3 + t.sin());
        let order = FracOrder::new(0.5).unwrap();
        let rl = frac_derivative(&f, order, Convention::RiemannLiouville, &[]).unwrap();
        let cap = frac_derivative(&f, order, Convention::Caputo, &[0.3]).unwrap();
        let one = grid(n, 2.0, |_| 0.3);
        let term = frac_derivative(&one, order, Convention::RiemannLiouville, &[]).unwrap();
        for i in (0..n).step_by(100) {
            assert_relative_eq!(rl.values()[i] - cap.values()[i], term.values()[i], epsilon = 1e-9);
        }
        let exact = 0.3 * 2f64.powf(-0.5) / gamma(0.5);
        assert_relative_eq!(term.values()[n - 1], exact, max_relative = 2e-3);
    }

    #[test]
    fn integral_semigroup() {
        let f = grid(2001, 2.0, |t| t * (1.0 + t).cos());
        let a = FracOrder::new(0.3).unwrap();
        let b = FracOrder::new(0.5).unwrap();
        let ab = FracOrder::new(0.8).unwrap();
        let lhs = frac_integral(&frac_integral(&f, a).unwrap(), b).unwrap();
        let rhs = frac_integral(&f, ab).unwrap();
        let scale = rhs.max_abs();
        for (x, y) in lhs.values().iter().zip(rhs.values()) {
            assert!((x - y).abs() <= 5e-3 * scale);
        }
    }

    #[test]
    fn derivative_inverts_integral() {
        for (alpha, n) in [(0.5, 2001), (0.8, 2001)] {
            let f = grid(n, 2.0, |t| t * t.cos());
            let order = FracOrder::new(alpha).unwrap();
            let j = frac_integral(&f, order).unwrap();
            let back = frac_derivative(&j, order, Convention::RiemannLiouville, &[]).unwrap();
            let tol = 5.0 * f.dt().powf(alpha.min(1.0)) * f.max_abs();
            for i in (n / 10..n).step_by(50) {
                assert!((back.values()[i] - f.values()[i]).abs() <= tol);
            }
        }
    }

    #[test]
    fn integer_order_is_finite_difference() {
        let f = grid(101, 1.0, |t| t * t);
        let d = frac_derivative(&f, FracOrder::new(1.0).unwrap(), Convention::Caputo, &[]).unwrap();
        let dt = f.dt();
        for i in 1..101 {
            let fd = (f.values()[i] - f.values()[i - 1]) / dt;
            assert_relative_eq!(d.values()[i], fd, max_relative = 1e-9);
        }
    }
}
