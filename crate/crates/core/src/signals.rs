//! Uniformly sampled signals and the numeric primitives every lowered
//! operational expression reduces to.
//!
//! All quadrature is trapezoidal. Binary operations require identical grids;
//! there is no implicit resampling.

use std::io::{Read, Write};
use std::ops::{Add, Mul, Neg, Sub};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Relative tolerance on the time step when reading CSV grids.
pub const CSV_STEP_TOLERANCE: f64 = 1e-9;

/// A real signal sampled at `t = i * dt`, `i = 0..len`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSignal {
    dt: f64,
    values: Vec<f64>,
}

impl SampledSignal {
    pub fn new(dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if values.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "at least 2 samples required, got {}",
                values.len()
            )));
        }
        Ok(Self { dt, values })
    }

    /// Samples `f` on `n` grid points.
    pub fn from_fn(dt: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(dt, (0..n).map(|i| f(i as f64 * dt)).collect())
    }

    pub fn zeros(dt: f64, n: usize) -> Result<Self> {
        Self::new(dt, vec![0.0; n])
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    /// Final sample time.
    pub fn horizon(&self) -> f64 {
        self.time(self.len() - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.time(i))
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.dt == other.dt && self.len() == other.len()
    }

    pub fn check_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                dt_a: self.dt,
                len_a: self.len(),
                dt_b: other.dt,
                len_b: other.len(),
            })
        }
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.len());
        Self {
            dt: self.dt,
            values,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        Ok(self.with_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x + a * y)
                .collect(),
        ))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Mean of squared samples.
    pub fn power(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.len() as f64
    }

    /// First `n` samples.
    pub fn truncate(&self, n: usize) -> Result<Self> {
        Self::new(self.dt, self.values[..n.min(self.len())].to_vec())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "value" {
            return Err(Error::Parse(format!(
                "expected header `t,value`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad number `{s}`: {e}")))
            };
            times.push(parse(&record[0])?);
            values.push(parse(&record[1])?);
        }
        if times.len() < 2 {
            return Err(Error::InvalidGrid("fewer than 2 rows".into()));
        }
        if times[0].abs() > CSV_STEP_TOLERANCE {
            return Err(Error::InvalidGrid(format!("first time must be 0, got {}", times[0])));
        }
        let n = times.len() - 1;
        let dt = times[n] / n as f64;
        for (i, w) in times.windows(2).enumerate() {
            let step = w[1] - w[0];
            if !(step > 0.0) {
                return Err(Error::InvalidGrid(format!("times not increasing at row {}", i + 1)));
            }
            if ((step - dt) / dt).abs() > CSV_STEP_TOLERANCE {
                return Err(Error::InvalidGrid(format!(
                    "non-uniform step at row {}: {step} vs {dt}",
                    i + 1
                )));
            }
        }
        Self::new(dt, values)
    }

    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "t,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(writer, "{},{}", self.time(i), v)?;
        }
        Ok(())
    }
}

impl Neg for &SampledSignal {
    type Output = SampledSignal;
    fn neg(self) -> SampledSignal {
        self.map(|v| -v)
    }
}

impl Mul<f64> for &SampledSignal {
    type Output = SampledSignal;
    fn mul(self, a: f64) -> SampledSignal {
        self.scale(a)
    }
}

/// Pointwise sum. Panics on grid mismatch; use [`SampledSignal::axpy`] for a
/// checked version.
impl Add for &SampledSignal {
    type Output = SampledSignal;
    fn add(self, rhs: &SampledSignal) -> SampledSignal {
        self.axpy(1.0, rhs).expect("grid mismatch in signal addition")
    }
}

impl Sub for &SampledSignal {
    type Output = SampledSignal;
    fn sub(self, rhs: &SampledSignal) -> SampledSignal {
        self.axpy(-1.0, rhs).expect("grid mismatch in signal subtraction")
    }
}

/// Trapezoidal approximation of `(f * g)(t) = ∫₀ᵗ f(σ) g(t − σ) dσ` on the
/// common grid.
///
/// The quadrature sum is accumulated in symmetric pairs so that
/// `convolve(f, g) == convolve(g, f)` holds bit for bit.
pub fn convolve(f: &SampledSignal, g: &SampledSignal) -> Result<SampledSignal> {
    f.check_grid(g)?;
    let (a, b) = (f.values(), g.values());
    let n = a.len();
    let mut out = vec![0.0; n];
    for (i, slot) in out.iter_mut().enumerate().skip(1) {
        let mut acc = 0.5 * (a[0] * b[i] + a[i] * b[0]);
        for k in 1..=i / 2 {
            let j = i - k;
            if k == j {
                acc += a[k] * b[k];
            } else {
                acc += a[k] * b[j] + a[j] * b[k];
            }
        }
        *slot = f.dt() * acc;
    }
    Ok(f.with_values(out))
}

/// `k`-fold integral `∫₀ᵗ (t − τ)^{k−1}/(k−1)! · y(τ) dτ` as a single
/// kernel integral (Cauchy's formula), trapezoidal.
pub fn repeated_integral(y: &SampledSignal, k: u32) -> Result<SampledSignal> {
    match k {
        0 => Err(Error::InvalidArgument(
            "repeated_integral requires k >= 1".into(),
        )),
        1 => {
            let v = y.values();
            let mut out = vec![0.0; v.len()];
            let mut acc = 0.0;
            for i in 1..v.len() {
                acc += 0.5 * y.dt() * (v[i - 1] + v[i]);
                out[i] = acc;
            }
            Ok(y.with_values(out))
        }
        _ => {
            let fact: f64 = (1..k).map(f64::from).product();
            let kernel = SampledSignal::from_fn(y.dt(), y.len(), |t| t.powi(k as i32 - 1) / fact)?;
            convolve(&kernel, y)
        }
    }
}

/// Lowering of the `j`-th `s`-derivative: sample `i` becomes
/// `(−i·dt)^j · f(i·dt)`.
pub fn t_weight(f: &SampledSignal, j: u32) -> SampledSignal {
    if j == 0 {
        return f.clone();
    }
    f.with_values(
        f.values()
            .iter()
            .enumerate()
            .map(|(i, &v)| (-f.time(i)).powi(j as i32) * v)
            .collect(),
    )
}

/// Adds seeded Gaussian white noise at the requested signal-to-noise ratio,
/// `10·log10(P_signal / P_noise)` in dB. `f64::INFINITY` returns the input.
pub fn add_white_noise(f: &SampledSignal, snr_db: f64, seed: u64) -> Result<SampledSignal> {
    if snr_db.is_nan() {
        return Err(Error::InvalidArgument("snr_db is NaN".into()));
    }
    if snr_db == f64::INFINITY {
        return Ok(f.clone());
    }
    let power = f.power();
    if !(power > 0.0) {
        return Err(Error::InvalidArgument(
            "cannot scale noise to a zero-power signal".into(),
        ));
    }
    let std = (power / 10f64.powf(snr_db / 10.0)).sqrt();
    let normal = Normal::new(0.0, std).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = f.values().iter().map(|v| v + normal.sample(&mut rng)).collect();
    Ok(f.with_values(values))
}
