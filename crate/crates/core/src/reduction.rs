//! Reduction of an arbitrary instance to finite form.
//!
//! Column `j` is admissible when `a_ij = -inf` on every row where `y_i = -inf`;
//! a solution with finite residual can only be supported on admissible
//! columns. Row `i` is admissible when `y_i` is finite and the row has a
//! finite entry in some admissible column. If some finite target row is not
//! admissible, every `x` has residual `+inf`.

use crate::error::{check_dim, Error, Result};
use crate::maxplus::{ExtReal, MaxPlusMatrix, MaxPlusVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Reduced,
    Infeasible,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Reduced => "reduced",
            Verdict::Infeasible => "infeasible",
        })
    }
}

/// `A_{RC}` and `y_R`. In finite form when the reduction verdict is `Reduced`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubProblem {
    pub a: MaxPlusMatrix,
    pub y: MaxPlusVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteFormReduction {
    kept_rows: Vec<usize>,
    kept_cols: Vec<usize>,
    full_cols: usize,
    sub_problem: SubProblem,
    verdict: Verdict,
}

impl FiniteFormReduction {
    pub fn kept_rows(&self) -> &[usize] {
        &self.kept_rows
    }

    pub fn kept_cols(&self) -> &[usize] {
        &self.kept_cols
    }

    pub fn sub_problem(&self) -> &SubProblem {
        &self.sub_problem
    }

    pub fn verdict(&self) -> Verdict {
        self.verdict
    }

    pub fn is_reduced(&self) -> bool {
        self.verdict == Verdict::Reduced
    }

    /// The sub-problem has no rows or no columns.
    pub fn is_empty(&self) -> bool {
        self.kept_rows.is_empty() || self.kept_cols.is_empty()
    }

    /// Scatters `x_sub` into the admissible columns, `-inf` elsewhere.
    pub fn lift(&self, x_sub: &MaxPlusVector) -> Result<MaxPlusVector> {
        if !self.is_reduced() {
            return Err(Error::ReductionInfeasible);
        }
        check_dim("lift input", self.kept_cols.len(), x_sub.len())?;
        let mut out = vec![ExtReal::NEG_INF; self.full_cols];
        for (&j, x) in self.kept_cols.iter().zip(x_sub.iter()) {
            out[j] = x;
        }
        Ok(MaxPlusVector::new(out))
    }

    /// Gathers the admissible columns of a full-length vector.
    pub fn restrict(&self, x: &MaxPlusVector) -> Result<MaxPlusVector> {
        check_dim("restrict input", self.full_cols, x.len())?;
        Ok(x.select(&self.kept_cols))
    }
}

pub fn reduce(a: &MaxPlusMatrix, y: &MaxPlusVector) -> Result<FiniteFormReduction> {
    check_dim("reduce target", a.rows(), y.len())?;
    let kept_cols: Vec<usize> = (0..a.cols())
        .filter(|&j| (0..a.rows()).all(|i| y[i].is_finite() || a.get(i, j).is_neg_inf()))
        .collect();
    let kept_rows: Vec<usize> = (0..a.rows())
        .filter(|&i| y[i].is_finite() && kept_cols.iter().any(|&j| a.get(i, j).is_finite()))
        .collect();
    let verdict = if kept_rows == y.support() {
        Verdict::Reduced
    } else {
        Verdict::Infeasible
    };
    let sub_problem = SubProblem {
        a: a.select(&kept_rows, &kept_cols),
        y: y.select(&kept_rows),
    };
    Ok(FiniteFormReduction {
        kept_rows,
        kept_cols,
        full_cols: a.cols(),
        sub_problem,
        verdict,
    })
}

/// Convenience wrapper around [`FiniteFormReduction::lift`].
pub fn lift(red: &FiniteFormReduction, x_sub: &MaxPlusVector) -> Result<MaxPlusVector> {
    red.lift(x_sub)
}
