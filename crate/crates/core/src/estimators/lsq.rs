//! Scaled least squares through the singular value decomposition.

use nalgebra::{DMatrix, DVector};

/// Solution of one stacked regressor system.
#[derive(Clone, Debug)]
pub struct LsqSolution {
    /// Minimiser; NaN entries when the system is singular.
    pub x: Vec<f64>,
    /// Smallest singular value of the row- and column-scaled matrix.
    pub min_sv: f64,
    /// `σ_min / σ_max` of the same matrix (0 for the zero matrix).
    pub rcond: f64,
}

impl LsqSolution {
    pub fn is_singular(&self) -> bool {
        self.x.iter().any(|v| !v.is_finite())
    }
}

/// Solves `A x ≈ b` in the least-squares sense.
///
/// Each row of `[A | b]` is divided by its largest absolute entry and each
/// column of `A` by its Euclidean norm before the SVD; the reported singular
/// values refer to that scaled matrix. Systems with `rcond < min_rcond` are
/// declared singular and return NaN.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>, min_rcond: f64) -> LsqSolution {
    solve_scaled(a, b, min_rcond, true)
}

/// As [`solve`], with the row scaling optional. Without it the caller's row
/// weights are kept, so a row that happens to vanish is not promoted to full
/// weight.
pub fn solve_scaled(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    min_rcond: f64,
    scale_rows: bool,
) -> LsqSolution {
    let (rows, cols) = a.shape();
    assert_eq!(rows, b.len(), "right-hand side length");
    let singular = |min_sv: f64, rcond: f64| LsqSolution {
        x: vec![f64::NAN; cols],
        min_sv,
        rcond,
    };
    if rows < cols || cols == 0 {
        return singular(0.0, 0.0);
    }
    let mut a = a.clone();
    let mut b = b.clone();
    for r in (0..rows).filter(|_| scale_rows) {
        let s = a.row(r).amax().max(b[r].abs());
        if s > 0.0 && s.is_finite() {
            a.row_mut(r).scale_mut(1.0 / s);
            b[r] /= s;
        }
    }
    let mut col_scale = vec![1.0; cols];
    for (c, cs) in col_scale.iter_mut().enumerate() {
        let n = a.column(c).norm();
        if n > 0.0 && n.is_finite() {
            a.column_mut(c).scale_mut(1.0 / n);
            *cs = n;
        }
    }
    if !a.iter().all(|v| v.is_finite()) || !b.iter().all(|v| v.is_finite()) {
        return singular(0.0, 0.0);
    }
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let max_sv = sv.max();
    let min_sv = sv.min();
    let rcond = if max_sv > 0.0 { min_sv / max_sv } else { 0.0 };
    if max_sv == 0.0 || rcond < min_rcond {
        return singular(min_sv, rcond);
    }
    match svd.solve(&b, 0.0) {
        Ok(x) => LsqSolution {
            x: x.iter().zip(&col_scale).map(|(v, s)| v / s).collect(),
            min_sv,
            rcond,
        },
        Err(_) => singular(min_sv, rcond),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_square_system() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = DVector::from_vec(vec![5.0, 11.0]);
        let s = solve(&a, &b, 1e-12);
        assert_relative_eq!(s.x[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(s.x[1], 2.0, max_relative = 1e-12);
        assert!(s.rcond > 0.0 && !s.is_singular());
    }

    #[test]
    fn consistent_overdetermined_badly_scaled() {
        let a = DMatrix::from_row_slice(3, 2, &[1e-6, 2e6, 3e-6, 1e6, 1e-6, 5e6]);
        let x = [7e6, -0.5e-6];
        let b = DVector::from_iterator(3, (0..3).map(|r| a[(r, 0)] * x[0] + a[(r, 1)] * x[1]));
        let s = solve(&a, &b, 1e-12);
        assert_relative_eq!(s.x[0], 7e6, max_relative = 1e-9);
        assert_relative_eq!(s.x[1], -0.5e-6, max_relative = 1e-9);
    }

    #[test]
    fn zero_and_rank_deficient() {
        let z = solve(&DMatrix::zeros(3, 2), &DVector::zeros(3), 1e-12);
        assert!(z.is_singular());
        assert_eq!(z.min_sv, 0.0);
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(solve(&a, &DVector::from_vec(vec![1.0, 2.0]), 1e-12).is_singular());
        assert!(solve(&DMatrix::zeros(1, 2), &DVector::zeros(1), 1e-12).is_singular());
    }
}
