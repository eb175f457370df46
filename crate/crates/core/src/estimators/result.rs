//! Estimate trajectories over the evaluation-time sweep.

use std::io::Write;

use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct IdentResult {
    /// Parameter names, in column order.
    pub names: Vec<String>,
    pub times: Vec<f64>,
    /// `trajectories[k][p]`: parameter `p` at `times[k]`; NaN where the
    /// regressor was singular.
    pub trajectories: Vec<Vec<f64>>,
    /// Monomial coherence residual per time (0 when nothing is overdetermined).
    pub coherence: Vec<f64>,
    /// Smallest singular value of the scaled regressor per time.
    pub min_sv: Vec<f64>,
    /// Index of the last well-conditioned time.
    pub final_index: usize,
    pub coherence_tol: f64,
    pub warnings: Vec<String>,
}

impl IdentResult {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Final estimate of `name`.
    pub fn estimate(&self, name: &str) -> Option<f64> {
        let c = self.column(name)?;
        Some(self.trajectories[self.final_index][c])
    }

    pub fn estimates(&self) -> Vec<(String, f64)> {
        self.names
            .iter()
            .cloned()
            .zip(self.trajectories[self.final_index].iter().copied())
            .collect()
    }

    pub fn trajectory(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.column(name)?;
        Some(self.trajectories.iter().map(|row| row[c]).collect())
    }

    pub fn final_time(&self) -> f64 {
        self.times[self.final_index]
    }

    pub fn final_coherence(&self) -> f64 {
        self.coherence[self.final_index]
    }

    pub fn final_min_sv(&self) -> f64 {
        self.min_sv[self.final_index]
    }

    /// Whether the final coherence residual is within tolerance.
    pub fn is_coherent(&self) -> bool {
        self.final_coherence() <= self.coherence_tol
    }

    pub fn rename(&mut self, from: &str, to: &str) {
        if let Some(c) = self.column(from) {
            self.names[c] = to.to_owned();
        }
    }

    /// Appends a derived parameter computed row by row from the others.
    pub fn push_derived(&mut self, name: &str, f: impl Fn(&[f64]) -> f64) {
        for row in &mut self.trajectories {
            let v = f(row);
            row.push(v);
        }
        self.names.push(name.to_owned());
    }

    /// CSV with header `t,<names>,coherence,min_sv`, one row per time.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_owned()];
        header.extend(self.names.iter().cloned());
        header.push("coherence".into());
        header.push("min_sv".into());
        w.write_record(&header)?;
        for (k, t) in self.times.iter().enumerate() {
            let mut rec = vec![t.to_string()];
            rec.extend(self.trajectories[k].iter().map(f64::to_string));
            rec.push(self.coherence[k].to_string());
            rec.push(self.min_sv[k].to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
