//! Identification pipelines: the hand-written Voigt equations, the general
//! grouped-model pipeline and the diffusion-wave estimator.

mod general;
mod lsq;
mod model;
mod result;
mod voigt;
mod wave;

pub use general::{identify_general, recover_theta2, regressor_signals, RegressorSystem, Regressors};
pub use lsq::{solve as solve_least_squares, LsqSolution};
pub use model::{Group, ModelSpec, Prepared, Regime};
pub use result::IdentResult;
pub use voigt::{
    identify_voigt_hom, identify_voigt_inhom_caputo, identify_voigt_inhom_rl, voigt_regressors,
    InitMode,
};
pub use wave::{identify_diffusion_wave, wave_equation, WaveKnown};

use crate::error::{Error, Result};

/// Settings shared by all estimators.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentOptions {
    /// Extra equations from further `s^{−1}` multiplication; `None` means
    /// number of unknown monomials + 2.
    pub n_extra: Option<u32>,
    /// Equations beyond the square system in the second stage.
    pub theta2_extra: u32,
    /// First evaluation time; `None` means 10 % of the horizon.
    pub t_min: Option<f64>,
    /// Evaluate every `stride`-th sample.
    pub stride: usize,
    /// Regressors with `σ_min/σ_max` below this are treated as singular.
    pub min_rcond: f64,
    pub coherence_tol: f64,
}

impl Default for IdentOptions {
    fn default() -> Self {
        Self {
            n_extra: None,
            theta2_extra: 2,
            t_min: None,
            stride: 1,
            min_rcond: 1e-10,
            coherence_tol: 1e-2,
        }
    }
}

impl IdentOptions {
    pub(crate) fn eval_indices(&self, n: usize, dt: f64) -> Result<Vec<usize>> {
        if self.stride == 0 {
            return Err(Error::InvalidArgument("stride must be positive".into()));
        }
        let horizon = (n - 1) as f64 * dt;
        let t_min = self.t_min.unwrap_or(0.1 * horizon);
        if !(t_min >= 0.0) || t_min > horizon {
            return Err(Error::InvalidArgument(format!(
                "t_min {t_min} outside [0, {horizon}]"
            )));
        }
        let first = ((t_min / dt - 1e-9).ceil() as usize).max(2);
        if first >= n {
            return Err(Error::InvalidArgument("no evaluation times".into()));
        }
        let mut idx: Vec<usize> = (first..n).step_by(self.stride).collect();
        if idx.last() != Some(&(n - 1)) {
            idx.push(n - 1);
        }
        Ok(idx)
    }
}
