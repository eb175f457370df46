//! The operator matrix `P` of the homogeneous system in the fractional powers
//! and its determinant over the commutative ring of operational expressions.

use std::fmt;

use super::expr::OpExpr;
use super::frac::{dds_tagged, FracOpExpr, Tag};
use super::poly::Monomial;
use crate::error::{Error, Result};

/// Square grid of [`OpExpr`] entries, row-major.
#[derive(Clone, PartialEq, Debug)]
pub struct OperatorMatrix {
    dim: usize,
    entries: Vec<OpExpr>,
}

impl OperatorMatrix {
    pub fn from_rows(rows: Vec<Vec<OpExpr>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument("operator matrix must be square".into()));
        }
        Ok(Self {
            dim,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &OpExpr {
        &self.entries[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[OpExpr] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> OpExpr {
        let cols: Vec<usize> = (0..self.dim).collect();
        self.minor_det(0, &cols)
    }

    fn minor_det(&self, row: usize, cols: &[usize]) -> OpExpr {
        match cols.len() {
            0 => OpExpr::s_pow(0),
            1 => self.get(row, cols[0]).clone(),
            _ => {
                let mut acc = OpExpr::zero();
                for (i, &c) in cols.iter().enumerate() {
                    let entry = self.get(row, c);
                    if entry.is_zero() {
                        continue;
                    }
                    let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                    let term = entry * &self.minor_det(row + 1, &rest);
                    acc = if i % 2 == 0 { &acc + &term } else { &acc - &term };
                }
                acc
            }
        }
    }
}

impl fmt::Display for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            for j in 0..self.dim {
                writeln!(f, "P[{i},{j}] =")?;
                writeln!(f, "{}", self.get(i, j))?;
            }
        }
        Ok(())
    }
}

/// Builds `P` from the grouped equation `Σ_j E_j s^{α_j} = 0`.
///
/// Row 0 holds the groups `E_j`; row `i` applies `d/ds + α_j s^{−1}` to row
/// `i − 1` column by column, which is the recursion for `p_{i,j}`, `q_{i,j}`.
pub fn build_p(row0: &FracOpExpr) -> Result<(OperatorMatrix, Vec<Tag>)> {
    if row0.is_empty() {
        return Err(Error::DegenerateModel("no exponent groups".into()));
    }
    if let Some((tag, _)) = row0.slots().find(|(_, e)| e.is_zero()) {
        return Err(Error::DegenerateModel(format!(
            "group at s^{tag} is identically zero"
        )));
    }
    let tags = row0.tags();
    let n = tags.len();
    let mut rows: Vec<Vec<OpExpr>> = Vec::with_capacity(n);
    rows.push(tags.iter().map(|t| row0.slot(t).cloned().unwrap_or_default()).collect());
    for i in 1..n {
        let next = tags
            .iter()
            .zip(&rows[i - 1])
            .map(|(t, e)| dds_tagged(t, e))
            .collect();
        rows.push(next);
    }
    Ok((OperatorMatrix::from_rows(rows)?, tags))
}

/// Result of eliminating all fractional powers from a grouped equation.
#[derive(Clone, Debug)]
pub struct Elimination {
    pub matrix: OperatorMatrix,
    pub tags: Vec<Tag>,
    /// Raw `det P`.
    pub det: OpExpr,
    /// Parameter monomial divided out of `det P` (nonzero parameters assumed).
    pub content: Monomial,
    /// The power `k` of the `s^{−k}` normalisation.
    pub k: u32,
    /// `s^{−k} det P / content`: only non-positive powers of `s`.
    pub equation: OpExpr,
}

/// `build_p` → `det` → monomial content division → normalisation.
pub fn eliminate(row0: &FracOpExpr) -> Result<Elimination> {
    let (matrix, tags) = build_p(row0)?;
    let det = matrix.det();
    if det.is_zero() {
        return Err(Error::DegenerateModel(
            "det P vanishes identically; the groups are linearly dependent".into(),
        ));
    }
    let content = det.monomial_content();
    let reduced = det
        .div_monomial(&content)
        .expect("content divides every coefficient");
    let (equation, k) = reduced.normalize();
    Ok(Elimination {
        matrix,
        tags,
        det,
        content,
        k,
        equation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcalc::expr::Factor;
    use crate::opcalc::poly::{ParamPoly, ParamSymbol};

    fn sym(s: &str) -> ParamPoly {
        ParamPoly::symbol(ParamSymbol::new(s))
    }
    fn sig(s: &str, j: u32) -> OpExpr {
        OpExpr::term(ParamPoly::one(), 0, vec![Factor::new(s.into(), j)])
    }

    /// Voigt in grouped form with E1 divided out: (σ̂ − E0 ε̂) s^0 − ε̂ s^α.
    fn voigt_row0() -> FracOpExpr {
        let mut row0 = FracOpExpr::new();
        row0.add_slot(Tag::zero(), &(&sig("sigma", 0) - &sig("eps", 0).scale(&sym("E0"))));
        row0.add_slot(Tag::symbol("alpha"), &(-&sig("eps", 0)));
        row0
    }

    #[test]
    fn voigt_second_row_has_shifted_derivative() {
        let (p, tags) = build_p(&voigt_row0()).unwrap();
        assert_eq!(tags, vec![Tag::zero(), Tag::symbol("alpha")]);
        // −(ε̂' + α s^{-1} ε̂)
        let expected = -&(&sig("eps", 1) + &sig("eps", 0).shift(-1).scale(&sym("alpha")));
        assert_eq!(p.get(1, 1), &expected);
    }

    #[test]
    fn voigt_det_matches_hand_expansion() {
        let (p, _) = build_p(&voigt_row0()).unwrap();
        let e0 = sym("E0");
        let a = sym("alpha");
        // (ε̂' + α s^{-1} ε̂)(σ̂ − E0 ε̂) − ε̂(σ̂' − E0 ε̂')
        let lhs = &(&sig("eps", 1) + &sig("eps", 0).shift(-1).scale(&a))
            * &(&sig("sigma", 0) - &sig("eps", 0).scale(&e0));
        let rhs = &sig("eps", 0) * &(&sig("sigma", 1) - &sig("eps", 1).scale(&e0));
        let hand = &lhs - &rhs;
        assert_eq!(p.det(), -&hand);
    }

    #[test]
    fn one_by_one_and_degenerate() {
        let row0 = FracOpExpr::single(Tag::zero(), sig("y", 0));
        let (p, _) = build_p(&row0).unwrap();
        assert_eq!(p.dim(), 1);
        assert_eq!(p.det(), sig("y", 0));

        let mut bad = voigt_row0();
        bad.add_slot(Tag::symbol("beta"), &OpExpr::zero());
        assert!(matches!(build_p(&bad), Err(Error::DegenerateModel(_))));
        assert!(build_p(&FracOpExpr::new()).is_err());
    }

    #[test]
    fn zero_row_gives_zero_det() {
        let p = OperatorMatrix::from_rows(vec![
            vec![sig("y", 0), sig("u", 0)],
            vec![OpExpr::zero(), OpExpr::zero()],
        ])
        .unwrap();
        assert!(p.det().is_zero());
    }

    #[test]
    fn rows_equal_repeated_dds_of_row0() {
        let mut row0 = voigt_row0();
        row0.add_slot(Tag::symbol("beta"), &sig("u", 0).shift(-1).scale(&sym("b")));
        let (p, tags) = build_p(&row0).unwrap();
        let mut direct = row0.clone();
        for i in 0..p.dim() {
            for (j, t) in tags.iter().enumerate() {
                assert_eq!(p.get(i, j), direct.slot(t).unwrap());
            }
            direct = direct.dds();
        }
    }
}
