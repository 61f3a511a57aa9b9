//! Chebyshev (p = ∞) regression via the principal solution.
//!
//! The principal solution `x̂_j = min_i (y_i - a_ij)` is the greatest
//! subsolution, `A ⊗ x̂ ≤ y`. Shifting it up by half of its sup-norm error
//! balances over- and under-estimation and is optimal for the ∞-norm.

use super::report::{SolveReport, SolverKind};
use super::RegressionProblem;
use crate::error::Result;
use crate::maxplus::{mat_vec, pnorm_distance, residual_norm, ExtReal, MaxPlusVector, Norm};

pub fn infnorm_solve(prob: &RegressionProblem) -> Result<SolveReport> {
    let red = prob.reduction();
    if !red.is_reduced() {
        return Ok(SolveReport::infeasible(prob, SolverKind::Infnorm));
    }
    let sub = prob.sub();
    let (a, y) = (&sub.a, &sub.y);
    let principal: MaxPlusVector = (0..a.cols())
        .map(|j| {
            (0..a.rows())
                .filter(|&i| a.get(i, j).is_finite())
                .map(|i| y[i].value() - a.get(i, j).value())
                .reduce(f64::min)
                .map_or(ExtReal::NEG_INF, ExtReal::from_raw)
        })
        .collect();
    let delta = pnorm_distance(&mat_vec(a, &principal)?, y, Norm::Inf)?.value();
    let shifted: MaxPlusVector = principal
        .iter()
        .map(|x| x.otimes(ExtReal::from_raw(delta / 2.0)))
        .collect();
    let solution = red.lift(&shifted)?;
    let mut rep = SolveReport::finish(prob, SolverKind::Infnorm, solution, Vec::new())?;
    rep.residual_infnorm = Some(residual_norm(prob.a(), prob.y(), &rep.solution, Norm::Inf)?);
    Ok(rep)
}
