//! Exact solver: depth-first search over pattern tuples with cycle-mean pruning.
//!
//! Vertex `(P_1, ..., P_k)` of the search tree fixes the argmax sets of the
//! first `k` rows. Its partial feasibility matrix only grows as rows are
//! added, so a vertex with `λ(F_v) > 0` has no feasible descendant. A vertex
//! whose only zero cycles run through strict inequalities is dropped too:
//! its cell is empty, and on data with coinciding rows (noiseless orbits)
//! such boundary-only tuples multiply exponentially. The optimiser's own
//! pattern always has a nonempty cell, so nothing is lost. Each surviving
//! leaf is projected and kept if admissible and strictly better. Subsets of a
//! row are visited in ascending bitmask order.

use super::report::{SolveReport, SolverKind, StepKind, TraceRecord};
use super::RegressionProblem;
use crate::error::{Error, Result};
use crate::exec::{map_ordered, Execution};
use crate::maxplus::MaxPlusVector;
use crate::maxplus::{pnorm_distance, MaxPlusMatrix, Norm, ResidualValue};
use crate::patterns::{
    accumulate_row, classes_of, empty_feasibility, interior_point_of, is_fixed_point, mask_members,
    project_unchecked, raw_to_matrix, realizable_raw, Pattern,
};
use crate::reduction::SubProblem;

/// Widest sub-problem the search accepts; the per-row branching is `2^d - 1`.
pub const MAX_BRUTE_COLS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BruteForceConfig {
    pub execution: Execution,
    /// Record one trace line per projected leaf.
    pub record_trace: bool,
}

impl Default for BruteForceConfig {
    fn default() -> Self {
        BruteForceConfig {
            execution: Execution::Parallel,
            record_trace: true,
        }
    }
}

struct Search<'a> {
    a: &'a MaxPlusMatrix,
    y: Option<&'a MaxPlusVector>,
    finite_masks: Vec<u32>,
    record: bool,
}

#[derive(Default)]
struct Outcome {
    best: Option<(ResidualValue, MaxPlusVector)>,
    trace: Vec<TraceRecord>,
    leaves: Vec<Pattern>,
    vertices: u64,
    projected: u64,
}

impl Outcome {
    fn absorb(&mut self, other: Outcome) {
        if let Some((r, x)) = other.best {
            if self.best.as_ref().is_none_or(|(b, _)| r < *b) {
                self.best = Some((r, x));
            }
        }
        self.trace.extend(other.trace);
        self.leaves.extend(other.leaves);
        self.vertices += other.vertices;
        self.projected += other.projected;
    }
}

/// Partial feasibility matrix of a vertex with its strict-edge flags.
#[derive(Clone)]
struct Constraints {
    f: Vec<f64>,
    strict: Vec<bool>,
}

impl Constraints {
    fn empty(d: usize) -> Self {
        Constraints {
            f: empty_feasibility(d),
            strict: vec![false; d * d],
        }
    }

    fn with_row(&self, a: &MaxPlusMatrix, i: usize, mask: u32) -> Option<Self> {
        let mut next = self.clone();
        accumulate_row(&mut next.f, &mut next.strict, a, i, &mask_members(mask));
        realizable_raw(a.cols(), &next.f, &next.strict).then_some(next)
    }
}

impl<'a> Search<'a> {
    fn new(a: &'a MaxPlusMatrix, y: Option<&'a MaxPlusVector>, record: bool) -> Self {
        let finite_masks = (0..a.rows())
            .map(|i| {
                a.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| x.is_finite())
                    .fold(0u32, |m, (j, _)| m | (1 << j))
            })
            .collect();
        Search {
            a,
            y,
            finite_masks,
            record,
        }
    }

    /// Nonempty subsets of row `i`'s finite columns, ascending.
    fn subsets(&self, i: usize) -> impl Iterator<Item = u32> + '_ {
        let full = self.finite_masks[i];
        (1..=full).filter(move |m| m & !full == 0)
    }

    /// Feasible vertices at depth `depth`, in traversal order.
    fn frontier(&self, depth: usize, out: &mut Outcome) -> Vec<(Vec<u32>, Constraints)> {
        let mut level = vec![(Vec::new(), Constraints::empty(self.a.cols()))];
        for i in 0..depth {
            let mut next = Vec::new();
            for (masks, c) in &level {
                for m in self.subsets(i) {
                    out.vertices += 1;
                    if let Some(g) = c.with_row(self.a, i, m) {
                        let mut ms = masks.clone();
                        ms.push(m);
                        next.push((ms, g));
                    }
                }
            }
            level = next;
        }
        level
    }

    fn descend(&self, masks: &mut Vec<u32>, c: &Constraints, out: &mut Outcome) -> Result<()> {
        let i = masks.len();
        if i == self.a.rows() {
            return self.leaf(masks, c, out);
        }
        for m in self.subsets(i) {
            out.vertices += 1;
            let Some(g) = c.with_row(self.a, i, m) else {
                continue;
            };
            masks.push(m);
            self.descend(masks, &g, out)?;
            masks.pop();
        }
        Ok(())
    }

    fn leaf(&self, masks: &[u32], c: &Constraints, out: &mut Outcome) -> Result<()> {
        let d = self.a.cols();
        let p = Pattern::from_masks(d, masks);
        let Some(y) = self.y else {
            out.leaves.push(p);
            return Ok(());
        };
        let fm = raw_to_matrix(d, &c.f);
        let anchor = interior_point_of(self.a, &p, &fm)?;
        let classes = classes_of(&p, &anchor)?;
        let proj = project_unchecked(self.a, &p, &classes, y, &MaxPlusVector::neg_inf(d))?;
        out.projected += 1;
        let dist = pnorm_distance(&proj.phi, y, Norm::Two)?;
        let admissible = is_fixed_point(&fm, &proj.psi);
        if admissible && out.best.as_ref().is_none_or(|(b, _)| dist < *b) {
            out.best = Some((dist, proj.psi));
        }
        if self.record {
            let mut rec = TraceRecord::new(StepKind::Leaf, dist);
            rec.pattern = Some(p);
            rec.admissible = Some(admissible);
            out.trace.push(rec);
        }
        Ok(())
    }

    fn run(&self, exec: Execution) -> Result<Outcome> {
        let n = self.a.rows();
        let mut out = Outcome::default();
        // Split on a shallow frontier so subtrees can run independently; the
        // ordered merge makes the result identical to a single sequential walk.
        let split = if exec.is_parallel() { n.min(2) } else { 0 };
        let roots = self.frontier(split, &mut out);
        let parts = map_ordered(exec, &roots, |(masks, c)| {
            let mut local = Outcome::default();
            let mut masks = masks.clone();
            self.descend(&mut masks, c, &mut local).map(|_| local)
        });
        for part in parts {
            out.absorb(part?);
        }
        Ok(out)
    }
}

fn check_width(sub: &SubProblem) -> Result<()> {
    if sub.a.cols() > MAX_BRUTE_COLS {
        return Err(Error::SizeCap {
            what: "brute-force columns",
            value: sub.a.cols(),
            cap: MAX_BRUTE_COLS,
        });
    }
    Ok(())
}

pub fn brute_force_solve(prob: &RegressionProblem) -> Result<SolveReport> {
    brute_force_solve_with(prob, &BruteForceConfig::default())
}

pub fn brute_force_solve_with(
    prob: &RegressionProblem,
    cfg: &BruteForceConfig,
) -> Result<SolveReport> {
    if !prob.reduction().is_reduced() {
        return Ok(SolveReport::infeasible(prob, SolverKind::Brute));
    }
    if prob.reduction().is_empty() {
        return SolveReport::finish(
            prob,
            SolverKind::Brute,
            MaxPlusVector::neg_inf(prob.cols()),
            Vec::new(),
        );
    }
    let sub = prob.sub();
    check_width(sub)?;
    let search = Search::new(&sub.a, Some(&sub.y), cfg.record_trace);
    let out = search.run(cfg.execution)?;
    let (_, x_sub) = out
        .best
        .ok_or_else(|| Error::Precondition("no admissible leaf found".into()))?;
    let solution = prob.reduction().lift(&x_sub)?;
    let mut report = SolveReport::finish(prob, SolverKind::Brute, solution, out.trace)?;
    report.vertices_checked = out.vertices;
    report.leaves_projected = out.projected;
    Ok(report)
}

/// All feasible patterns of `a` in traversal order, found by the pruned search.
pub fn feasible_patterns(a: &MaxPlusMatrix, exec: Execution) -> Result<Vec<Pattern>> {
    if a.cols() > MAX_BRUTE_COLS {
        return Err(Error::SizeCap {
            what: "pattern enumeration columns",
            value: a.cols(),
            cap: MAX_BRUTE_COLS,
        });
    }
    Ok(Search::new(a, None, false).run(exec)?.leaves)
}
