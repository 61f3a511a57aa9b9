//! Patterns of support and the pattern-local geometry of the residual.
//!
//! A pattern `P = (P_1, ..., P_n)` records, for every row `i`, which columns
//! attain the maximum in `(A ⊗ x)_i`. Each pattern labels one polyhedral cell
//! of `x`-space on which `A ⊗ x` is classically affine. This module computes
//! the feasibility matrix of a pattern, a point inside its domain, the
//! equivalence classes of columns tied together by the pattern, the local
//! affine map, the normal projection of a target onto the pattern's extended
//! image (`Φ`) and the closest preimage of that projection (`Ψ`).
//!
//! Indices are 0-based in the API; the text form is 1-based.

use std::fmt;

use crate::error::{check_dim, Error, Result};
use crate::maxplus::{
    kleene_star, mat_vec, max_cycle_mean, squared_distance, star_column_mean, ExtReal,
    MaxPlusMatrix, MaxPlusVector, ResidualValue, CYCLE_TOL,
};

/// Absolute tolerance for argmax ties and fixed-point comparisons.
pub const TIE_TOL: f64 = 1e-9;

/// Per-row argmax index sets over `cols` columns.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    cols: usize,
    row_sets: Vec<Vec<usize>>,
}

impl Pattern {
    /// Sets are sorted and de-duplicated; each must be nonempty and in range.
    pub fn new(cols: usize, row_sets: Vec<Vec<usize>>) -> Result<Self> {
        let mut row_sets = row_sets;
        for set in &mut row_sets {
            set.sort_unstable();
            set.dedup();
            if set.is_empty() {
                return Err(Error::Precondition("pattern row set is empty".into()));
            }
            if let Some(&j) = set.last() {
                if j >= cols {
                    return Err(Error::IndexOutOfRange {
                        index: j,
                        len: cols,
                    });
                }
            }
        }
        Ok(Pattern { cols, row_sets })
    }

    /// Pattern from row bitmasks (bit `j` set means column `j` attains).
    pub(crate) fn from_masks(cols: usize, masks: &[u32]) -> Self {
        Pattern {
            cols,
            row_sets: masks.iter().map(|&m| mask_members(m)).collect(),
        }
    }

    /// Parses the `1,2;1;2` form (1-based indices, rows separated by `;`).
    pub fn parse(text: &str, cols: usize) -> Result<Self> {
        let bad = |msg: String| Error::Parse {
            line: 1,
            column: 1,
            message: msg,
        };
        let text = text.trim();
        if text.is_empty() {
            return Pattern::new(cols, Vec::new());
        }
        let mut sets = Vec::new();
        for row in text.split(';') {
            let mut set = Vec::new();
            for item in row.split(',') {
                let k: usize = item
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("invalid pattern index '{item}'")))?;
                if k == 0 {
                    return Err(bad("pattern indices are 1-based".into()));
                }
                set.push(k - 1);
            }
            sets.push(set);
        }
        Pattern::new(cols, sets)
    }

    pub fn rows(&self) -> usize {
        self.row_sets.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_sets(&self) -> &[Vec<usize>] {
        &self.row_sets
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.row_sets[i]
    }

    /// `P ⪯ Q`: entrywise inclusion.
    pub fn is_refined_by(&self, other: &Pattern) -> bool {
        self.cols == other.cols
            && self.rows() == other.rows()
            && self
                .row_sets
                .iter()
                .zip(&other.row_sets)
                .all(|(a, b)| a.iter().all(|j| b.binary_search(j).is_ok()))
    }

    /// `∪ P_i`, sorted.
    pub fn support(&self) -> Vec<usize> {
        let mut seen = vec![false; self.cols];
        for set in &self.row_sets {
            for &j in set {
                seen[j] = true;
            }
        }
        (0..self.cols).filter(|&j| seen[j]).collect()
    }

    /// The subpattern picking `min(P_i)` in every row.
    pub fn subpattern(&self) -> Subpattern {
        Subpattern {
            cols: self.cols,
            picks: self.row_sets.iter().map(|s| s[0]).collect(),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, set) in self.row_sets.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            for (k, j) in set.iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", j + 1)?;
            }
        }
        Ok(())
    }
}

pub(crate) fn mask_members(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask & (1 << b) != 0).collect()
}

/// One column per row: `picks[i] = min(P_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subpattern {
    cols: usize,
    picks: Vec<usize>,
}

impl Subpattern {
    pub fn picks(&self) -> &[usize] {
        &self.picks
    }

    pub fn as_pattern(&self) -> Pattern {
        Pattern {
            cols: self.cols,
            row_sets: self.picks.iter().map(|&j| vec![j]).collect(),
        }
    }

    /// `(y_P)_i = a_{i, p(i)}`.
    pub fn offsets(&self, a: &MaxPlusMatrix) -> MaxPlusVector {
        self.picks
            .iter()
            .enumerate()
            .map(|(i, &j)| a.get(i, j))
            .collect()
    }
}

/// Equivalence classes of columns tied together by a pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternClasses {
    class_of: Vec<usize>,
    class_sizes: Vec<usize>,
    anchor: MaxPlusVector,
}

impl PatternClasses {
    /// Class label (0-based, dense) of column `j`.
    pub fn class_of(&self, j: usize) -> usize {
        self.class_of[j]
    }

    pub fn labels(&self) -> &[usize] {
        &self.class_of
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    pub fn count(&self) -> usize {
        self.class_sizes.len()
    }

    pub fn anchor(&self) -> &MaxPlusVector {
        &self.anchor
    }

    /// Members of class `k`, ascending.
    pub fn members(&self, k: usize) -> Vec<usize> {
        (0..self.class_of.len())
            .filter(|&j| self.class_of[j] == k)
            .collect()
    }
}

/// `P_i = {j : a_ij + x_j = (A ⊗ x)_i}` within [`TIE_TOL`].
///
/// A row whose product is `-inf` gets the full index set.
pub fn pattern_of(a: &MaxPlusMatrix, x: &MaxPlusVector) -> Result<Pattern> {
    let ax = mat_vec(a, x)?;
    let d = a.cols();
    let row_sets = (0..a.rows())
        .map(|i| {
            let best = ax[i];
            if best.is_neg_inf() {
                return (0..d).collect();
            }
            (0..d)
                .filter(|&j| {
                    let v = a.get(i, j).otimes(x[j]);
                    v.is_finite() && v.value() >= best.value() - TIE_TOL
                })
                .collect()
        })
        .collect();
    Ok(Pattern { cols: d, row_sets })
}

fn check_pattern_shape(a: &MaxPlusMatrix, p: &Pattern) -> Result<()> {
    check_dim("pattern rows", a.rows(), p.rows())?;
    check_dim("pattern columns", a.cols(), p.cols())
}

/// Adds the constraints contributed by row `i` with argmax set `set` to `f`.
///
/// `strict[j*d+k]` records whether the heaviest witness of `f_jk` comes from
/// a column `k` outside the set, i.e. a strict inequality.
pub(crate) fn accumulate_row(
    f: &mut [f64],
    strict: &mut [bool],
    a: &MaxPlusMatrix,
    i: usize,
    set: &[usize],
) {
    let d = a.cols();
    let row = a.row(i);
    for &j in set {
        let aij = row[j];
        if aij.is_neg_inf() {
            continue;
        }
        for (k, aik) in row.iter().enumerate() {
            if k == j || aik.is_neg_inf() {
                continue;
            }
            let w = aik.value() - aij.value();
            let is_strict = set.binary_search(&k).is_err();
            let slot = &mut f[j * d + k];
            if w > *slot {
                *slot = w;
                strict[j * d + k] = is_strict;
            } else if w == *slot && is_strict {
                strict[j * d + k] = true;
            }
        }
    }
}

/// `X(P)` is nonempty: no positive cycle, and no zero cycle through a strict edge.
pub(crate) fn realizable_raw(d: usize, f: &[f64], strict: &[bool]) -> bool {
    let Ok(star) = kleene_star(&raw_to_matrix(d, f)) else {
        return false;
    };
    for j in 0..d {
        for k in 0..d {
            let w = f[j * d + k];
            if strict[j * d + k] && w != f64::NEG_INFINITY {
                let back = star.get(k, j);
                if back.is_finite() && w + back.value() > -CYCLE_TOL {
                    return false;
                }
            }
        }
    }
    true
}

/// Whether some `x` has exactly pattern `P`.
///
/// Stronger than [`is_feasible`] on degenerate data: coinciding rows can
/// close a zero-weight cycle through a strict inequality, which leaves the
/// closure of `X(P)` nonempty while `X(P)` itself is empty.
pub fn is_realizable(a: &MaxPlusMatrix, p: &Pattern) -> Result<bool> {
    check_pattern_shape(a, p)?;
    if !members_finite(a, p) {
        return Ok(false);
    }
    let d = a.cols();
    let mut f = empty_feasibility(d);
    let mut strict = vec![false; d * d];
    for (i, set) in p.row_sets.iter().enumerate() {
        accumulate_row(&mut f, &mut strict, a, i, set);
    }
    Ok(realizable_raw(d, &f, &strict))
}

pub(crate) fn empty_feasibility(d: usize) -> Vec<f64> {
    let mut f = vec![f64::NEG_INFINITY; d * d];
    for j in 0..d {
        f[j * d + j] = 0.0;
    }
    f
}

pub(crate) fn raw_to_matrix(d: usize, f: &[f64]) -> MaxPlusMatrix {
    MaxPlusMatrix::from_entries(d, d, f.iter().map(|&v| ExtReal::from_raw(v)).collect())
        .expect("square buffer")
}

/// `d x d` matrix with zero diagonal and `f_jk = max{a_ik - a_ij : j ∈ P_i}`.
pub fn feasibility_matrix(a: &MaxPlusMatrix, p: &Pattern) -> Result<MaxPlusMatrix> {
    check_pattern_shape(a, p)?;
    let d = a.cols();
    let mut f = empty_feasibility(d);
    let mut strict = vec![false; d * d];
    for (i, set) in p.row_sets.iter().enumerate() {
        accumulate_row(&mut f, &mut strict, a, i, set);
    }
    Ok(raw_to_matrix(d, &f))
}

/// Every member of every `P_i` has a finite coefficient.
fn members_finite(a: &MaxPlusMatrix, p: &Pattern) -> bool {
    p.row_sets
        .iter()
        .enumerate()
        .all(|(i, set)| set.iter().all(|&j| a.get(i, j).is_finite()))
}

/// `λ(F_P) = 0` within [`CYCLE_TOL`], with finite coefficients on every pick.
pub fn is_feasible(a: &MaxPlusMatrix, p: &Pattern) -> Result<bool> {
    let f = feasibility_matrix(a, p)?;
    if !members_finite(a, p) {
        return Ok(false);
    }
    Ok(max_cycle_mean(&f)?.value() <= CYCLE_TOL)
}

fn require_feasible(a: &MaxPlusMatrix, p: &Pattern) -> Result<()> {
    if is_feasible(a, p)? {
        Ok(())
    } else {
        Err(Error::InfeasiblePattern)
    }
}

/// A finite point of the domain `X(P)`.
///
/// This is the column mean of `F_P*`. When the star has `-inf` entries, the
/// missing edges are first replaced by a weight `-K` low enough not to
/// create a nonnegative cycle, which keeps the mean finite without changing
/// the star's finite entries.
pub fn domain_interior_point(a: &MaxPlusMatrix, p: &Pattern) -> Result<MaxPlusVector> {
    require_feasible(a, p)?;
    let f = feasibility_matrix(a, p)?;
    interior_point_of(a, p, &f)
}

pub(crate) fn interior_point_of(
    a: &MaxPlusMatrix,
    p: &Pattern,
    f: &MaxPlusMatrix,
) -> Result<MaxPlusVector> {
    let d = f.rows();
    let spread = f
        .entries()
        .iter()
        .filter(|x| x.is_finite())
        .map(|x| x.value().abs())
        .fold(0.0, f64::max);
    let mut weight = 2.0 * (d as f64 + 1.0) * (1.0 + spread);
    let mut candidate = None;
    for _ in 0..6 {
        let completed: Vec<ExtReal> = f
            .entries()
            .iter()
            .map(|x| x.oplus(ExtReal::from_raw(-weight)))
            .collect();
        let completed = MaxPlusMatrix::from_entries(d, d, completed)?;
        let x = star_column_mean(&kleene_star(&completed)?);
        if pattern_of(a, &x)? == *p {
            return Ok(x);
        }
        candidate = Some(x);
        weight *= 4.0;
    }
    // Degenerate pattern: λ(F_P) = 0 but its strict inequalities cannot all hold.
    // The last candidate still lies in the closure of the domain.
    Ok(candidate.expect("at least one attempt"))
}

/// Connected components of the column co-membership relation.
///
/// Labels are assigned in increasing order of each class's smallest member.
pub fn classes_of(p: &Pattern, anchor: &MaxPlusVector) -> Result<PatternClasses> {
    check_dim("class anchor", p.cols(), anchor.len())?;
    let d = p.cols();
    let mut parent: Vec<usize> = (0..d).collect();
    fn find(parent: &mut [usize], mut j: usize) -> usize {
        while parent[j] != j {
            parent[j] = parent[parent[j]];
            j = parent[j];
        }
        j
    }
    for set in &p.row_sets {
        let root = find(&mut parent, set[0]);
        for &j in &set[1..] {
            let r = find(&mut parent, j);
            if r != root {
                let (lo, hi) = if r < root { (r, root) } else { (root, r) };
                parent[hi] = lo;
            }
        }
    }
    let mut label_of_root = vec![usize::MAX; d];
    let mut class_of = vec![0; d];
    let mut class_sizes = Vec::new();
    for j in 0..d {
        let r = find(&mut parent, j);
        if label_of_root[r] == usize::MAX {
            label_of_root[r] = class_sizes.len();
            class_sizes.push(0);
        }
        class_of[j] = label_of_root[r];
        class_sizes[class_of[j]] += 1;
    }
    Ok(PatternClasses {
        class_of,
        class_sizes,
        anchor: anchor.clone(),
    })
}

/// `A_P(x) = L x + y_P`: row `i` reads `x_{p(i)} + a_{i,p(i)}`.
pub fn local_map(a: &MaxPlusMatrix, p: &Pattern, x: &MaxPlusVector) -> Result<MaxPlusVector> {
    check_pattern_shape(a, p)?;
    check_dim("local_map input", a.cols(), x.len())?;
    Ok(p.row_sets
        .iter()
        .enumerate()
        .map(|(i, set)| x[set[0]].otimes(a.get(i, set[0])))
        .collect())
}

/// `Φ(P, y)` and `Ψ(P, y, x)` together; they share the class means.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub phi: MaxPlusVector,
    pub psi: MaxPlusVector,
}

/// Class-wise mean correction `mean{(y - L x_P - y_P)_i : c(p(i)) = k}`.
///
/// Classes hit by no row pick get a zero shift.
fn class_shifts(
    a: &MaxPlusMatrix,
    picks: &[usize],
    classes: &PatternClasses,
    y: &MaxPlusVector,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let anchor = classes.anchor();
    let mut base = Vec::with_capacity(picks.len());
    let mut sums = vec![0.0; classes.count()];
    let mut counts = vec![0usize; classes.count()];
    for (i, &j) in picks.iter().enumerate() {
        let aij = a.get(i, j);
        let xj = anchor[j];
        if aij.is_neg_inf() || xj.is_neg_inf() {
            return Err(Error::Precondition(format!(
                "row {i} picks column {j} with a non-finite coefficient or anchor"
            )));
        }
        if y[i].is_neg_inf() {
            return Err(Error::Precondition(format!("target entry {i} is -inf")));
        }
        let b = xj.value() + aij.value();
        base.push(b);
        let k = classes.class_of(j);
        sums[k] += y[i].value() - b;
        counts[k] += 1;
    }
    let shifts = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
        .collect();
    Ok((base, shifts))
}

/// `Φ` and `Ψ` without re-checking feasibility; used by the solvers.
pub(crate) fn project_unchecked(
    a: &MaxPlusMatrix,
    p: &Pattern,
    classes: &PatternClasses,
    y: &MaxPlusVector,
    x: &MaxPlusVector,
) -> Result<Projection> {
    let picks: Vec<usize> = p.row_sets.iter().map(|s| s[0]).collect();
    let (base, shifts) = class_shifts(a, &picks, classes, y)?;
    let phi = picks
        .iter()
        .zip(&base)
        .map(|(&j, b)| ExtReal::from_raw(b + shifts[classes.class_of(j)]))
        .collect();
    let mut in_support = vec![false; p.cols()];
    for set in &p.row_sets {
        for &j in set {
            in_support[j] = true;
        }
    }
    let anchor = classes.anchor();
    let psi = (0..p.cols())
        .map(|j| {
            if in_support[j] {
                ExtReal::from_raw(anchor[j].value() + shifts[classes.class_of(j)])
            } else {
                x[j]
            }
        })
        .collect();
    Ok(Projection { phi, psi })
}

fn check_projection_inputs(
    a: &MaxPlusMatrix,
    p: &Pattern,
    classes: &PatternClasses,
    y: &MaxPlusVector,
) -> Result<()> {
    check_pattern_shape(a, p)?;
    check_dim("target length", a.rows(), y.len())?;
    check_dim("class labels", a.cols(), classes.labels().len())?;
    require_feasible(a, p)
}

/// Normal projection `Φ(P, y)` of `y` onto the extended image of `P`.
pub fn normal_projection(
    a: &MaxPlusMatrix,
    p: &Pattern,
    classes: &PatternClasses,
    y: &MaxPlusVector,
) -> Result<MaxPlusVector> {
    check_projection_inputs(a, p, classes, y)?;
    let x = MaxPlusVector::neg_inf(a.cols());
    Ok(project_unchecked(a, p, classes, y, &x)?.phi)
}

/// Closest point `Ψ(P, y, x)` to `x` in the preimage of `Φ(P, y)`.
///
/// Coordinates outside `support(P)` are copied from `x`.
pub fn closest_preimage(
    a: &MaxPlusMatrix,
    p: &Pattern,
    classes: &PatternClasses,
    y: &MaxPlusVector,
    x: &MaxPlusVector,
) -> Result<MaxPlusVector> {
    check_projection_inputs(a, p, classes, y)?;
    check_dim("closest_preimage x", a.cols(), x.len())?;
    Ok(project_unchecked(a, p, classes, y, x)?.psi)
}

/// `F ⊗ x == x` within [`TIE_TOL`]; since `F` has a zero diagonal only the
/// upper side needs checking.
pub(crate) fn is_fixed_point(f: &MaxPlusMatrix, x: &MaxPlusVector) -> bool {
    let fx = mat_vec(f, x).expect("square feasibility matrix");
    let ok = fx.iter().zip(x.iter()).all(|(lhs, rhs)| {
        if rhs.is_neg_inf() {
            lhs.is_neg_inf()
        } else {
            lhs.value() <= rhs.value() + TIE_TOL
        }
    });
    ok
}

/// `Φ(P, y)` is admissible iff `F_P ⊗ Ψ(P, y, -inf) = Ψ(P, y, -inf)`.
pub fn is_admissible(a: &MaxPlusMatrix, p: &Pattern, y: &MaxPlusVector) -> Result<bool> {
    check_pattern_shape(a, p)?;
    check_dim("target length", a.rows(), y.len())?;
    let f = feasibility_matrix(a, p)?;
    require_feasible(a, p)?;
    let anchor = interior_point_of(a, p, &f)?;
    let classes = classes_of(p, &anchor)?;
    let psi = project_unchecked(a, p, &classes, y, &MaxPlusVector::neg_inf(a.cols()))?.psi;
    Ok(is_fixed_point(&f, &psi))
}

/// `R_P(x) = ||A_P(x) - y||_2^2 / 2`.
pub fn local_residual(
    a: &MaxPlusMatrix,
    p: &Pattern,
    y: &MaxPlusVector,
    x: &MaxPlusVector,
) -> Result<ResidualValue> {
    check_dim("target length", a.rows(), y.len())?;
    let ax = local_map(a, p, x)?;
    Ok(ResidualValue::from_raw(squared_distance(&ax, y)? / 2.0))
}
