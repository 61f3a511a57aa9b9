//! Max-plus 2-norm regression solvers and their shared report type.
//!
//! Every solver works on the finite-form sub-problem of a
//! [`RegressionProblem`] and lifts its answer back to full length.

mod brute;
mod infnorm;
mod newton;
mod report;

pub use brute::{brute_force_solve, brute_force_solve_with, feasible_patterns, BruteForceConfig};
pub use infnorm::infnorm_solve;
pub use newton::{
    multistart_from, multistart_newton, multistart_newton_with, newton_solve, newton_step,
    random_starts, NewtonConfig, Starts, MULTISTART_PATIENCE, MULTISTART_POLISH_MU,
};
pub use report::{Regularization, SolveReport, SolverKind, StepKind, TraceRecord};

use crate::error::{check_dim, Result};
use crate::maxplus::{MaxPlusMatrix, MaxPlusVector};
use crate::reduction::{reduce, FiniteFormReduction, SubProblem};

/// An instance `(A, y)` together with its finite-form reduction.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionProblem {
    a: MaxPlusMatrix,
    y: MaxPlusVector,
    reduction: FiniteFormReduction,
}

impl RegressionProblem {
    pub fn new(a: MaxPlusMatrix, y: MaxPlusVector) -> Result<Self> {
        check_dim("target length", a.rows(), y.len())?;
        let reduction = reduce(&a, &y)?;
        Ok(RegressionProblem { a, y, reduction })
    }

    pub fn a(&self) -> &MaxPlusMatrix {
        &self.a
    }

    pub fn y(&self) -> &MaxPlusVector {
        &self.y
    }

    pub fn reduction(&self) -> &FiniteFormReduction {
        &self.reduction
    }

    pub fn sub(&self) -> &SubProblem {
        self.reduction.sub_problem()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }
}
