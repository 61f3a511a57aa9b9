//! Newton's method with undershooting, and the multistart protocol.
//!
//! The Newton map sends `x` to the closest preimage `Ψ(p(x), y, x)` of the
//! normal projection for the subpattern of `x`'s pattern. Subpattern classes
//! are singletons, so coordinate `j` becomes the mean of `y_i - a_ij` over
//! the rows that pick `j`; unpicked coordinates keep their value.

use super::report::{renumber, SolveReport, SolverKind, StepKind, TraceRecord};
use super::RegressionProblem;
use crate::error::{check_dim, Error, Result};
use crate::exec::{map_ordered, Execution};
use crate::maxplus::{
    mat_vec, pnorm_distance, ExtReal, MaxPlusMatrix, MaxPlusVector, Norm, ResidualValue,
};
use crate::patterns::{pattern_of, TIE_TOL};
use crate::reduction::SubProblem;
use crate::rng::Rng;

pub const MULTISTART_PATIENCE: usize = 5;
pub const MULTISTART_POLISH_MU: f64 = 0.05;
pub const DEFAULT_MAX_ITERS: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub enum Starts {
    /// Full-length initial vectors.
    Given(Vec<MaxPlusVector>),
    /// `count` uniform draws from per-column boxes, seeded.
    Random { count: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonConfig {
    pub mu: f64,
    pub patience: usize,
    pub max_iters: usize,
    pub starts: Starts,
    pub execution: Execution,
}

impl NewtonConfig {
    pub fn new(mu: f64, patience: usize, starts: Starts) -> Result<Self> {
        let cfg = NewtonConfig {
            mu,
            patience,
            max_iters: DEFAULT_MAX_ITERS,
            starts,
            execution: Execution::Parallel,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "mu must lie in (0, 1], got {}",
                self.mu
            )));
        }
        if self.patience == 0 {
            return Err(Error::InvalidConfig("patience must be at least 1".into()));
        }
        Ok(())
    }
}

/// One Newton step on a finite-form sub-problem.
pub(crate) fn step_sub(
    a: &MaxPlusMatrix,
    y: &MaxPlusVector,
    x: &MaxPlusVector,
    mu: f64,
) -> MaxPlusVector {
    let d = a.cols();
    let mut sums = vec![0.0; d];
    let mut counts = vec![0usize; d];
    for i in 0..a.rows() {
        // First column attaining the row maximum within the tie tolerance.
        let row = a.row(i);
        let best = row
            .iter()
            .zip(x.iter())
            .map(|(aij, xj)| aij.otimes(xj))
            .fold(ExtReal::NEG_INF, ExtReal::oplus);
        if best.is_neg_inf() || y[i].is_neg_inf() {
            continue;
        }
        let pick = (0..d)
            .find(|&j| {
                let v = row[j].otimes(x[j]);
                v.is_finite() && v.value() >= best.value() - TIE_TOL
            })
            .expect("a finite maximum has an attaining column");
        sums[pick] += y[i].value() - row[pick].value();
        counts[pick] += 1;
    }
    (0..d)
        .map(|j| {
            let xj = x[j];
            if counts[j] == 0 {
                return xj;
            }
            let target = sums[j] / counts[j] as f64;
            if xj.is_neg_inf() || mu == 1.0 {
                // A -inf coordinate can only be picked in a row that is -inf
                // throughout, which is skipped above, so this is the μ = 1 case.
                ExtReal::from_raw(target)
            } else {
                ExtReal::from_raw((1.0 - mu) * xj.value() + mu * target)
            }
        })
        .collect()
}

/// `(1 - μ) x + μ N(x)` on the full problem.
pub fn newton_step(prob: &RegressionProblem, x: &MaxPlusVector, mu: f64) -> Result<MaxPlusVector> {
    check_dim("newton_step x", prob.cols(), x.len())?;
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "mu must lie in (0, 1], got {mu}"
        )));
    }
    let red = prob.reduction();
    if !red.is_reduced() {
        return Err(Error::ReductionInfeasible);
    }
    let sub = prob.sub();
    let stepped = step_sub(&sub.a, &sub.y, &red.restrict(x)?, mu);
    red.lift(&stepped)
}

pub(crate) struct Run {
    pub best: MaxPlusVector,
    pub residual: ResidualValue,
    pub trace: Vec<TraceRecord>,
    pub iterations: u64,
}

fn distance(sub: &SubProblem, x: &MaxPlusVector) -> ResidualValue {
    let ax = mat_vec(&sub.a, x).expect("restricted iterate");
    pnorm_distance(&ax, &sub.y, Norm::Two).expect("matching lengths")
}

fn record(sub: &SubProblem, x: &MaxPlusVector, r: ResidualValue, start: usize) -> TraceRecord {
    let mut rec = TraceRecord::new(StepKind::Newton, r);
    rec.start = Some(start);
    rec.pattern = pattern_of(&sub.a, x).ok();
    rec
}

/// Iterates from `x0`, tracking the best point seen (including `x0`), and
/// stops after `patience` steps without strict improvement.
pub(crate) fn run_from(
    sub: &SubProblem,
    x0: MaxPlusVector,
    mu: f64,
    patience: usize,
    max_iters: usize,
    start: usize,
) -> Run {
    let mut r_min = distance(sub, &x0);
    let mut trace = vec![record(sub, &x0, r_min, start)];
    let mut best = x0.clone();
    let mut x = x0;
    let mut stall = 0;
    let mut iterations = 0;
    while iterations < max_iters as u64 && stall < patience {
        x = step_sub(&sub.a, &sub.y, &x, mu);
        iterations += 1;
        let r = distance(sub, &x);
        if r < r_min {
            r_min = r;
            best = x.clone();
            stall = 0;
        } else {
            stall += 1;
        }
        trace.push(record(sub, &x, r, start));
    }
    Run {
        best,
        residual: r_min,
        trace,
        iterations,
    }
}

/// Uniform starts in the box `[min_i (y_i - a_ij), max_i (y_i - a_ij)]` per column.
pub fn random_starts(prob: &RegressionProblem, count: usize, seed: u64) -> Vec<MaxPlusVector> {
    let sub = prob.sub();
    let boxes: Vec<Option<(f64, f64)>> = (0..sub.a.cols())
        .map(|j| {
            let gaps = (0..sub.a.rows())
                .filter(|&i| sub.a.get(i, j).is_finite())
                .map(|i| ExtReal::from_raw(sub.y[i].value() - sub.a.get(i, j).value()));
            crate::maxplus::finite_range(gaps)
        })
        .collect();
    let mut rng = Rng::new(seed);
    (0..count)
        .map(|_| {
            let x_sub: MaxPlusVector = boxes
                .iter()
                .map(|b| match b {
                    Some((lo, hi)) => ExtReal::from_raw(rng.uniform(*lo, *hi)),
                    None => ExtReal::NEG_INF,
                })
                .collect();
            prob.reduction()
                .lift(&x_sub)
                .unwrap_or_else(|_| MaxPlusVector::neg_inf(prob.cols()))
        })
        .collect()
}

fn resolve_starts(prob: &RegressionProblem, starts: &Starts) -> Result<Vec<MaxPlusVector>> {
    match starts {
        Starts::Given(v) => {
            for x in v {
                check_dim("newton start", prob.cols(), x.len())?;
            }
            Ok(v.clone())
        }
        Starts::Random { count, seed } => Ok(random_starts(prob, *count, *seed)),
    }
}

/// Runs `phases` (μ, patience) in sequence from each start, keeps the best.
fn solve_phases(
    prob: &RegressionProblem,
    starts: &[MaxPlusVector],
    phases: &[(f64, usize)],
    max_iters: usize,
    exec: Execution,
) -> Result<SolveReport> {
    let red = prob.reduction();
    if !red.is_reduced() {
        return Ok(SolveReport::infeasible(prob, SolverKind::Newton));
    }
    if red.is_empty() || starts.is_empty() {
        let mut rep = SolveReport::finish(
            prob,
            SolverKind::Newton,
            MaxPlusVector::neg_inf(prob.cols()),
            Vec::new(),
        )?;
        if !red.is_empty() {
            rep.residual_2norm = ResidualValue::INFINITE;
        }
        return Ok(rep);
    }
    let sub = prob.sub();
    let restricted = starts
        .iter()
        .map(|x| red.restrict(x))
        .collect::<Result<Vec<_>>>()?;
    let indexed: Vec<(usize, MaxPlusVector)> = restricted.into_iter().enumerate().collect();
    let runs = map_ordered(exec, &indexed, |(k, x0)| {
        let mut x = x0.clone();
        let mut trace = Vec::new();
        let mut iterations = 0;
        let mut residual = ResidualValue::INFINITE;
        for &(mu, patience) in phases {
            let run = run_from(sub, x, mu, patience, max_iters, *k);
            trace.extend(run.trace);
            iterations += run.iterations;
            residual = run.residual;
            x = run.best;
        }
        Run {
            best: x,
            residual,
            trace,
            iterations,
        }
    });
    let mut best: Option<(ResidualValue, &MaxPlusVector)> = None;
    let mut trace = Vec::new();
    let mut iterations = 0;
    for run in &runs {
        if best.is_none_or(|(r, _)| run.residual < r) {
            best = Some((run.residual, &run.best));
        }
        iterations += run.iterations;
    }
    let solution = red.lift(best.expect("at least one start").1)?;
    for run in runs {
        trace.extend(run.trace);
    }
    renumber(&mut trace);
    let mut rep = SolveReport::finish(prob, SolverKind::Newton, solution, trace)?;
    rep.iterations = iterations;
    Ok(rep)
}

/// Undershooting Newton once from each configured start; the best result wins.
pub fn newton_solve(prob: &RegressionProblem, cfg: &NewtonConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let starts = resolve_starts(prob, &cfg.starts)?;
    let mut rep = solve_phases(
        prob,
        &starts,
        &[(cfg.mu, cfg.patience)],
        cfg.max_iters,
        cfg.execution,
    )?;
    if let Starts::Random { seed, .. } = cfg.starts {
        rep.seed = Some(seed);
    }
    Ok(rep)
}

/// Each start runs μ = 1 then μ = 0.05, both with patience 5.
pub fn multistart_from(
    prob: &RegressionProblem,
    starts: &[MaxPlusVector],
    exec: Execution,
) -> Result<SolveReport> {
    for x in starts {
        check_dim("newton start", prob.cols(), x.len())?;
    }
    solve_phases(
        prob,
        starts,
        &[
            (1.0, MULTISTART_PATIENCE),
            (MULTISTART_POLISH_MU, MULTISTART_PATIENCE),
        ],
        DEFAULT_MAX_ITERS,
        exec,
    )
}

pub fn multistart_newton(
    prob: &RegressionProblem,
    seed: u64,
    n_starts: usize,
) -> Result<SolveReport> {
    multistart_newton_with(prob, seed, n_starts, Execution::Parallel)
}

pub fn multistart_newton_with(
    prob: &RegressionProblem,
    seed: u64,
    n_starts: usize,
    exec: Execution,
) -> Result<SolveReport> {
    let starts = random_starts(prob, n_starts, seed);
    let mut rep = multistart_from(prob, &starts, exec)?;
    rep.seed = Some(seed);
    Ok(rep)
}
