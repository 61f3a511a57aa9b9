//! Sparsity-regularized regression and iteratively reshifted least squares.
//!
//! The regularized objective is `||A ⊗ x - y||_2^2 + λ Σ_j x_j`. Near a point
//! `x_prev` it differs by a constant (up to second order) from the augmented
//! residual `||[A; I] ⊗ x - [y; x_prev - λ/2]||_2^2`, so each outer step
//! solves one ordinary max-plus regression with shifted identity targets.
//! Coordinates that keep sinking are sent to `-inf`.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_dim, Error, Result};
use crate::exec::Execution;
use crate::maxplus::{
    residual_norm, squared_distance, ExtReal, MaxPlusMatrix, MaxPlusVector, Norm,
};
use crate::solvers::{
    brute_force_solve_with, multistart_from, BruteForceConfig, RegressionProblem, Regularization,
    SolveReport, SolverKind, StepKind, TraceRecord,
};
use crate::text::format_f64;

/// Value of the regularized objective under its extended ordering.
///
/// With `λ > 0` every `-inf` coordinate sends the penalty to `-inf`; such
/// values are ranked by their number of `-inf` coordinates (more is better)
/// and then by the remaining finite total. With `λ = 0` the count is zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RegularizedObjective {
    Finite { minus_inf: usize, total: f64 },
    Infinite,
}

impl RegularizedObjective {
    pub fn total(&self) -> Option<f64> {
        match self {
            RegularizedObjective::Finite { total, .. } => Some(*total),
            RegularizedObjective::Infinite => None,
        }
    }

    pub fn minus_inf(&self) -> usize {
        match self {
            RegularizedObjective::Finite { minus_inf, .. } => *minus_inf,
            RegularizedObjective::Infinite => 0,
        }
    }

    /// `Less` means better.
    pub fn rank(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        use RegularizedObjective::*;
        match (self, other) {
            (Infinite, Infinite) => Ordering::Equal,
            (Infinite, _) => Ordering::Greater,
            (_, Infinite) => Ordering::Less,
            (
                Finite {
                    minus_inf: a,
                    total: s,
                },
                Finite {
                    minus_inf: b,
                    total: t,
                },
            ) => b.cmp(a).then(s.total_cmp(t)),
        }
    }
}

impl fmt::Display for RegularizedObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegularizedObjective::Infinite => f.write_str("inf"),
            RegularizedObjective::Finite { minus_inf, total } => {
                write!(f, "{minus_inf} {}", format_f64(*total))
            }
        }
    }
}

impl FromStr for RegularizedObjective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("invalid objective '{s}'"));
        if s == "inf" {
            return Ok(RegularizedObjective::Infinite);
        }
        let (count, total) = s.split_once(' ').ok_or_else(bad)?;
        Ok(RegularizedObjective::Finite {
            minus_inf: count.parse().map_err(|_| bad())?,
            total: total.parse().map_err(|_| bad())?,
        })
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "lambda must be finite and non-negative, got {lambda}"
        )))
    }
}

pub fn regularized_objective(
    a: &MaxPlusMatrix,
    y: &MaxPlusVector,
    lambda: f64,
    x: &MaxPlusVector,
) -> Result<RegularizedObjective> {
    check_lambda(lambda)?;
    check_dim("objective rows", a.rows(), y.len())?;
    let sq = squared_distance(&crate::maxplus::mat_vec(a, x)?, y)?;
    if sq.is_infinite() {
        return Ok(RegularizedObjective::Infinite);
    }
    let finite_sum: f64 = x.iter().filter(|v| v.is_finite()).map(|v| v.value()).sum();
    let minus_inf = if lambda > 0.0 {
        x.iter().filter(|v| v.is_neg_inf()).count()
    } else {
        0
    };
    Ok(RegularizedObjective::Finite {
        minus_inf,
        total: sq + lambda * finite_sum,
    })
}

/// `||[A; I] ⊗ x - [y; x_prev - λ/2]||_2^2` over the finite coordinates of `x_prev`.
pub fn augmented_objective(
    a: &MaxPlusMatrix,
    y: &MaxPlusVector,
    lambda: f64,
    x: &MaxPlusVector,
    x_prev: &MaxPlusVector,
) -> Result<f64> {
    check_lambda(lambda)?;
    check_dim("augmented x_prev", x.len(), x_prev.len())?;
    let active = x_prev.support();
    let (aug_a, aug_y) = augment(a, y, lambda, x_prev, &active)?;
    squared_distance(
        &crate::maxplus::mat_vec(&aug_a, &x.select(&active))?,
        &aug_y,
    )
}

/// `[A_{:,J}; I]` and `[y; x_prev_J - λ/2]` for the active columns `J`.
fn augment(
    a: &MaxPlusMatrix,
    y: &MaxPlusVector,
    lambda: f64,
    x_prev: &MaxPlusVector,
    active: &[usize],
) -> Result<(MaxPlusMatrix, MaxPlusVector)> {
    check_dim("augment rows", a.rows(), y.len())?;
    let rows: Vec<usize> = (0..a.rows()).collect();
    let aug_a = a
        .select(&rows, active)
        .vstack(&MaxPlusMatrix::identity(active.len()))?;
    let mut targets = y.entries().to_vec();
    targets.extend(
        active
            .iter()
            .map(|&j| ExtReal::from_raw(x_prev[j].value() - lambda / 2.0)),
    );
    Ok((aug_a, MaxPlusVector::new(targets)))
}

/// A max-plus 2-norm solver used for the augmented problems.
pub trait InnerSolver: Sync {
    /// Solves `prob`, starting from (or near) `warm`.
    fn solve(&self, prob: &RegressionProblem, warm: &MaxPlusVector) -> Result<SolveReport>;
}

/// Exact inner solves; affordable for small widths only.
#[derive(Clone, Copy, Debug, Default)]
pub struct BruteInner;

impl InnerSolver for BruteInner {
    fn solve(&self, prob: &RegressionProblem, _warm: &MaxPlusVector) -> Result<SolveReport> {
        brute_force_solve_with(
            prob,
            &BruteForceConfig {
                execution: Execution::Sequential,
                record_trace: false,
            },
        )
    }
}

/// Two-phase Newton from the single warm start.
#[derive(Clone, Copy, Debug, Default)]
pub struct NewtonInner;

impl InnerSolver for NewtonInner {
    fn solve(&self, prob: &RegressionProblem, warm: &MaxPlusVector) -> Result<SolveReport> {
        multistart_from(prob, std::slice::from_ref(warm), Execution::Sequential)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IrslsConfig {
    pub lambda: f64,
    pub tol: f64,
    pub max_outer: usize,
    /// Consecutive decreases required before snapping.
    pub snap_after: usize,
    /// Distance below the largest coordinate required before snapping.
    pub snap_gap: f64,
}

impl IrslsConfig {
    pub fn new(lambda: f64) -> Self {
        IrslsConfig {
            lambda,
            tol: 1e-6,
            max_outer: 100,
            snap_after: 5,
            snap_gap: 50.0,
        }
    }
}

/// Column `j` is the only finite active entry of some row.
fn is_sole_support(a: &MaxPlusMatrix, active: &[bool], j: usize) -> bool {
    (0..a.rows()).any(|i| {
        a.get(i, j).is_finite()
            && (0..a.cols()).all(|k| k == j || !active[k] || a.get(i, k).is_neg_inf())
    })
}

pub fn irsls(
    a: &MaxPlusMatrix,
    y: &MaxPlusVector,
    x0: &MaxPlusVector,
    cfg: &IrslsConfig,
    inner: &dyn InnerSolver,
) -> Result<SolveReport> {
    check_lambda(cfg.lambda)?;
    check_dim("irsls x0", a.cols(), x0.len())?;
    let prob = RegressionProblem::new(a.clone(), y.clone())?;
    let red = prob.reduction().clone();
    if !red.is_reduced() {
        return Ok(SolveReport::infeasible(&prob, SolverKind::Irsls));
    }
    let sub = prob.sub();
    let (sa, sy) = (&sub.a, &sub.y);
    let d = sa.cols();
    let mut x = red.restrict(x0)?;
    let mut active: Vec<bool> = x.iter().map(|v| v.is_finite()).collect();
    if (0..sa.rows()).any(|i| (0..d).all(|j| !active[j] || sa.get(i, j).is_neg_inf())) {
        return Err(Error::Precondition(
            "x0 must be finite on the admissible columns".into(),
        ));
    }
    let mut streak = vec![0usize; d];
    let mut trace = Vec::new();
    let mut outer = 0u64;
    while (outer as usize) < cfg.max_outer && !red.is_empty() {
        outer += 1;
        let cols: Vec<usize> = (0..d).filter(|&j| active[j]).collect();
        let (aug_a, aug_y) = augment(sa, sy, cfg.lambda, &x, &cols)?;
        let aug = RegressionProblem::new(aug_a, aug_y)?;
        let report = inner.solve(&aug, &x.select(&cols))?;
        let mut change: f64 = 0.0;
        let mut next = x.clone().into_entries();
        for (k, &j) in cols.iter().enumerate() {
            let new = report.solution[k];
            let old = x[j];
            if new.is_finite() && old.is_finite() {
                change = change.max((new.value() - old.value()).abs());
                streak[j] = if new < old { streak[j] + 1 } else { 0 };
            }
            next[j] = new;
        }
        x = MaxPlusVector::new(next);
        let top = cols
            .iter()
            .map(|&j| x[j])
            .filter(|v| v.is_finite())
            .map(|v| v.value())
            .fold(f64::NEG_INFINITY, f64::max);
        let mut snapped = false;
        for &j in &cols {
            if streak[j] >= cfg.snap_after
                && x[j].value() < top - cfg.snap_gap
                && !is_sole_support(sa, &active, j)
            {
                active[j] = false;
                let mut e = x.clone().into_entries();
                e[j] = ExtReal::NEG_INF;
                x = MaxPlusVector::new(e);
                snapped = true;
            }
        }
        let mut rec = TraceRecord::new(
            StepKind::Irsls,
            crate::maxplus::pnorm_distance(&crate::maxplus::mat_vec(sa, &x)?, sy, Norm::Two)?,
        );
        rec.pattern = crate::patterns::pattern_of(sa, &x).ok();
        trace.push(rec);
        if change < cfg.tol && !snapped {
            break;
        }
    }
    let solution = red.lift(&x)?;
    let objective = regularized_objective(a, y, cfg.lambda, &solution)?;
    let mut rep = SolveReport::finish(&prob, SolverKind::Irsls, solution, trace)?;
    rep.iterations = outer;
    rep.regularization = Some(Regularization {
        lambda: cfg.lambda,
        objective,
    });
    debug_assert_eq!(
        rep.residual_2norm,
        residual_norm(a, y, &rep.solution, Norm::Two)?
    );
    Ok(rep)
}
