//! Algebraic identification of linear fractional-order models.
//!
//! Unknown coefficients and differentiation orders are recovered from linear
//! equations whose entries are nested convolutions and integrals of measured
//! signals. Measured data is never differentiated numerically.
//!
//! The crate is organised bottom-up:
//!
//! - [`signals`]: uniform-grid signals, trapezoidal convolution, repeated
//!   integration and `t`-power weighting.
//! - [`fracops`]: Grünwald–Letnikov fractional integrals and derivatives.
//! - [`opcalc`]: symbolic operational expressions, `d/ds`, the operator
//!   matrix and its determinant, and lowering to numeric signals.
//! - [`estimators`]: end-to-end identification pipelines.
//! - [`simulate`]: forward models used to generate validation data.
//! - [`benchmark`]: the acceptance suite shared by tests and the CLI.

pub mod benchmark;
pub mod error;
pub mod estimators;
pub mod fracops;
pub mod opcalc;
pub mod signals;
pub mod simulate;

pub use error::{Error, Result};
pub use signals::SampledSignal;
