//! Forward data generation: Voigt stress from strain, the diffusion-wave
//! boundary map at the orders with closed-form kernels, and test inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::fracops::{frac_derivative, Convention, FracOrder};
use crate::signals::{convolve, SampledSignal};

/// Parameters of `σ = E0 ε + E1 D^α ε`.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct VoigtParams {
    pub e0: f64,
    pub e1: f64,
    pub alpha: f64,
    pub convention: Convention,
    /// `ε(0)` under Caputo, `J^{1−α}ε(0+)` under Riemann–Liouville.
    /// `None` is the homogeneous regime.
    pub init: Option<f64>,
}

impl VoigtParams {
    pub fn homogeneous(alpha: f64, e0: f64, e1: f64) -> Self {
        Self {
            e0,
            e1,
            alpha,
            convention: Convention::RiemannLiouville,
            init: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "Voigt order must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if !self.e0.is_finite() || !self.e1.is_finite() {
            return Err(Error::InvalidArgument("Voigt moduli must be finite".into()));
        }
        Ok(())
    }
}

/// Stress response of the generalized Voigt model.
///
/// Under Caputo, `init` must equal the first strain sample (it is required
/// whenever that sample is nonzero). Under Riemann–Liouville with
/// `init = Some(c)` the strain must contain `c·t^{α−1}/Γ(α)` sampled by
/// [`singular_power`]; that component has zero RL derivative and is removed
/// before the GL sum.
pub fn voigt_forward(eps: &SampledSignal, p: &VoigtParams) -> Result<SampledSignal> {
    p.validate()?;
    let order = FracOrder::new(p.alpha)?;
    let scale = eps.max_abs().max(1.0);
    let eps0 = eps.values()[0];
    let deriv = match (p.convention, p.init) {
        (Convention::Caputo, None) if eps0 != 0.0 => {
            return Err(Error::InvalidArgument(
                "strain starts away from zero; Caputo simulation needs init = eps(0)".into(),
            ));
        }
        (Convention::Caputo, init) => {
            let e0 = init.unwrap_or(0.0);
            if (e0 - eps0).abs() > 1e-12 * scale {
                return Err(Error::InvalidArgument(format!(
                    "init eps(0) = {e0} disagrees with the first strain sample {eps0}"
                )));
            }
            frac_derivative(eps, order, Convention::Caputo, &[e0])?
        }
        (Convention::RiemannLiouville, None) => {
            frac_derivative(eps, order, Convention::RiemannLiouville, &[])?
        }
        (Convention::RiemannLiouville, Some(c)) => {
            let sing = singular_power(c, p.alpha, eps.dt(), eps.len())?;
            let regular = eps.axpy(-1.0, &sing)?;
            frac_derivative(&regular, order, Convention::RiemannLiouville, &[])?
        }
    };
    eps.scale(p.e0).axpy(p.e1, &deriv)
}

/// Samples `c·t^{α−1}/Γ(α)`, `0 < α < 1`, on a uniform grid.
///
/// The value at `t = 0` is the endpoint weight that makes trapezoidal sums of
/// `t^{α−1} g(t)` accurate to `O(dt^{1+α})`: by the generalized
/// Euler–Maclaurin expansion the sum without the singular sample is off by
/// `ζ(1−α) g(0) dt^α`, which a sample of `−2ζ(1−α) dt^{α−1}` cancels.
pub fn singular_power(c: f64, alpha: f64, dt: f64, n: usize) -> Result<SampledSignal> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "singular component needs 0 < alpha < 1, got {alpha}"
        )));
    }
    let g = gamma(alpha);
    let mut s = SampledSignal::from_fn(dt, n, |t| c * t.powf(alpha - 1.0) / g)?;
    let mut v = s.values().to_vec();
    v[0] = -2.0 * zeta(1.0 - alpha) * c * dt.powf(alpha - 1.0) / g;
    s = s.with_values(v);
    Ok(s)
}

/// Riemann zeta on `0 < s < 1` through the alternating series and Borwein's
/// acceleration.
fn zeta(s: f64) -> f64 {
    const N: usize = 40;
    let mut d = [0.0; N + 1];
    let mut term = 1.0;
    let mut acc = 1.0;
    d[0] = 1.0;
    for (i, di) in d.iter_mut().enumerate().skip(1) {
        let (nf, i_f) = (N as f64, i as f64);
        term *= 4.0 * (nf + i_f - 1.0) * (nf - i_f + 1.0) / ((2.0 * i_f) * (2.0 * i_f - 1.0));
        acc += term;
        *di = acc;
    }
    let dn = d[N];
    let eta: f64 = -(0..N)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * (d[k] - dn) / ((k + 1) as f64).powf(s)
        })
        .sum::<f64>()
        / dn;
    eta / (1.0 - 2f64.powf(1.0 - s))
}

/// Order and ratio `c = L/v` of the boundary map `ĝ = ĥ exp(−c s^{α/2})`.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct WaveParams {
    pub alpha: f64,
    pub c: f64,
}

/// Boundary response `g` of the diffusion-wave half-space to the input `h`.
///
/// `α = 2` is the delay `g(t) = h(t − c)`; a delay off the grid by more than
/// `1e−9` relative is rounded to the nearest sample. `α = 1` convolves with
/// `k_c(t) = c/(2√(π t³)) exp(−c²/(4t))`, `k_c(0) = 0`.
pub fn diffusion_wave_forward(h: &SampledSignal, p: &WaveParams) -> Result<SampledSignal> {
    if !(p.c > 0.0) || !p.c.is_finite() {
        return Err(Error::InvalidArgument(format!("wave ratio must be > 0, got {}", p.c)));
    }
    if p.alpha == 2.0 {
        let shift = p.c / h.dt();
        let k = shift.round();
        if (shift - k).abs() > 1e-9 * shift.max(1.0) {
            log::warn!("delay {} is not a multiple of dt = {}; rounded to {k} samples", p.c, h.dt());
        }
        let k = k as usize;
        let v = h.values();
        let out = (0..v.len()).map(|i| if i >= k { v[i - k] } else { 0.0 }).collect();
        Ok(h.with_values(out))
    } else if p.alpha == 1.0 {
        let kernel = SampledSignal::from_fn(h.dt(), h.len(), |t| wave_kernel(p.c, t))?;
        convolve(h, &kernel)
    } else {
        Err(Error::InvalidArgument(format!(
            "forward simulation supports alpha in {{1, 2}}, got {}",
            p.alpha
        )))
    }
}

/// Inverse transform of `exp(−c√s)`.
pub fn wave_kernel(c: f64, t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        c / (2.0 * (std::f64::consts::PI * t.powi(3)).sqrt()) * (-c * c / (4.0 * t)).exp()
    }
}

/// Deterministic input signals, all starting at zero.
#[derive(Clone, PartialEq, Debug)]
pub enum SignalKind {
    /// `slope · t`.
    Ramp { slope: f64 },
    /// `amplitude · sin(omega t)`.
    Sine { amplitude: f64, omega: f64 },
    /// Quintic rise from 0 to 1 over `[0, rise]`, flat afterwards.
    SmoothStep { rise: f64 },
    /// Seeded random ±1 levels held for `hold` seconds, joined by quintic
    /// transitions of length `hold / 2`, starting from 0.
    PrbsSmoothed { hold: f64, seed: u64 },
}

/// Samples `kind` on `[0, horizon]` with step `dt`; `horizon/dt` must be an
/// integer of at least 1.
pub fn test_signal(kind: &SignalKind, horizon: f64, dt: f64) -> Result<SampledSignal> {
    if !(dt > 0.0) || !(horizon > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "horizon {horizon} and dt {dt} must be positive"
        )));
    }
    let steps = horizon / dt;
    let m = steps.round();
    if (steps - m).abs() > 1e-9 * steps || m < 1.0 {
        return Err(Error::InvalidGrid(format!(
            "horizon {horizon} is not a positive multiple of dt {dt}"
        )));
    }
    let n = m as usize + 1;
    match *kind {
        SignalKind::Ramp { slope } => SampledSignal::from_fn(dt, n, |t| slope * t),
        SignalKind::Sine { amplitude, omega } => {
            SampledSignal::from_fn(dt, n, |t| amplitude * (omega * t).sin())
        }
        SignalKind::SmoothStep { rise } => {
            if !(rise > 0.0) {
                return Err(Error::InvalidArgument("rise time must be > 0".into()));
            }
            SampledSignal::from_fn(dt, n, |t| smoothstep(t / rise))
        }
        SignalKind::PrbsSmoothed { hold, seed } => {
            if !(hold > 0.0) {
                return Err(Error::InvalidArgument("hold time must be > 0".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let switches = (horizon / hold).ceil() as usize + 1;
            let mut jumps = Vec::with_capacity(switches);
            let mut prev = 0.0;
            for k in 0..switches {
                let level = if rng.random::<bool>() { 1.0 } else { -1.0 };
                jumps.push((k as f64 * hold, level - prev));
                prev = level;
            }
            let width = hold / 2.0;
            SampledSignal::from_fn(dt, n, |t| {
                jumps
                    .iter()
                    .map(|&(t0, dj)| dj * smoothstep((t - t0) / width))
                    .sum()
            })
        }
    }
}

fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
    }
}
