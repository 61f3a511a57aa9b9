#![allow(dead_code, clippy::needless_range_loop)]

use proptest::prelude::*;
use tropreg::maxplus::{ExtReal, MaxPlusMatrix, MaxPlusVector};
use tropreg::patterns::Pattern;

pub const NI: f64 = f64::NEG_INFINITY;

pub fn mat(rows: &[Vec<f64>]) -> MaxPlusMatrix {
    MaxPlusMatrix::from_rows(rows).unwrap()
}

pub fn vecf(v: &[f64]) -> MaxPlusVector {
    MaxPlusVector::from_f64(v).unwrap()
}

/// Entries uniform in `[-5, 5]`, with `-inf` at rate `p_inf`.
pub fn matrix_strategy(n: usize, d: usize, p_inf: f64) -> impl Strategy<Value = MaxPlusMatrix> {
    prop::collection::vec((-5.0..5.0f64, 0.0..1.0f64), n * d).prop_map(move |cells| {
        let rows: Vec<Vec<f64>> = cells
            .chunks(d)
            .map(|r| {
                r.iter()
                    .map(|&(v, u)| if u < p_inf { NI } else { v })
                    .collect()
            })
            .collect();
        mat(&rows)
    })
}

pub fn finite_vec(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = MaxPlusVector> {
    prop::collection::vec(lo..hi, n).prop_map(|v| vecf(&v))
}

/// Random finite `(A, y)` with `1 <= n <= max_n`, `1 <= d <= max_d`.
pub fn problem_strategy(
    max_n: usize,
    max_d: usize,
) -> impl Strategy<Value = (MaxPlusMatrix, MaxPlusVector)> {
    (1..=max_n, 1..=max_d)
        .prop_flat_map(|(n, d)| (matrix_strategy(n, d, 0.0), finite_vec(n, -5.0, 5.0)))
}

/// Largest mean over all simple cycles, by explicit enumeration.
pub fn cycle_mean_by_enumeration(b: &MaxPlusMatrix) -> f64 {
    let d = b.rows();
    let mut best = NI;
    let mut path = Vec::new();
    for start in 0..d {
        path.clear();
        path.push(start);
        extend_cycles(b, start, &mut path, 0.0, &mut best);
    }
    best
}

fn extend_cycles(
    b: &MaxPlusMatrix,
    start: usize,
    path: &mut Vec<usize>,
    weight: f64,
    best: &mut f64,
) {
    let last = *path.last().unwrap();
    let d = b.rows();
    for next in start..d {
        let w = b.get(last, next);
        if w.is_neg_inf() {
            continue;
        }
        if next == start {
            let mean = (weight + w.value()) / path.len() as f64;
            if mean > *best {
                *best = mean;
            }
        } else if !path.contains(&next) {
            path.push(next);
            extend_cycles(b, start, path, weight + w.value(), best);
            path.pop();
        }
    }
}

/// `F_P` straight from its definition: `f_jk = max{a_ik - a_ij : j in P_i}`.
pub fn feasibility_by_definition(a: &MaxPlusMatrix, p: &Pattern) -> MaxPlusMatrix {
    let d = a.cols();
    let mut rows = vec![vec![NI; d]; d];
    for j in 0..d {
        rows[j][j] = 0.0;
    }
    for i in 0..a.rows() {
        for &j in p.row(i) {
            let aij = a.get(i, j);
            if aij.is_neg_inf() {
                continue;
            }
            for k in 0..d {
                let aik = a.get(i, k);
                if k != j && aik.is_finite() {
                    rows[j][k] = rows[j][k].max(aik.value() - aij.value());
                }
            }
        }
    }
    mat(&rows)
}

/// Patterns with a non-positive cycle mean in their feasibility matrix and
/// finite picks, over every tuple of nonempty subsets.
pub fn feasible_by_enumeration(a: &MaxPlusMatrix) -> Vec<Pattern> {
    let (n, d) = (a.rows(), a.cols());
    let mut out = Vec::new();
    let mut masks = vec![1u32; n];
    let full = (1u32 << d) - 1;
    loop {
        let sets: Vec<Vec<usize>> = masks
            .iter()
            .map(|&m| (0..d).filter(|b| m & (1 << b) != 0).collect())
            .collect();
        let finite = sets
            .iter()
            .enumerate()
            .all(|(i, s)| s.iter().all(|&j| a.get(i, j).is_finite()));
        if finite {
            let p = Pattern::new(d, sets).unwrap();
            if cycle_mean_by_enumeration(&feasibility_by_definition(a, &p)) <= 1e-9 {
                out.push(p);
            }
        }
        let mut i = 0;
        while i < n && masks[i] == full {
            masks[i] = 1;
            i += 1;
        }
        if i == n {
            break;
        }
        masks[i] += 1;
    }
    out
}

/// Solves the square system `m z = r` by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut m: Vec<Vec<f64>>, mut r: Vec<f64>) -> Vec<f64> {
    let k = r.len();
    for c in 0..k {
        let piv = (c..k)
            .max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))
            .unwrap();
        m.swap(c, piv);
        r.swap(c, piv);
        for row in c + 1..k {
            let f = m[row][c] / m[c][c];
            for col in c..k {
                m[row][col] -= f * m[c][col];
            }
            r[row] -= f * r[c];
        }
    }
    let mut z = vec![0.0; k];
    for c in (0..k).rev() {
        let s: f64 = (c + 1..k).map(|col| m[c][col] * z[col]).sum();
        z[c] = (r[c] - s) / m[c][c];
    }
    z
}

/// Least-squares fit of `y` by the local map of `P` with tied columns moving
/// together, via normal equations. Returns `(fitted image, preimage)` with
/// `-inf` outside the support.
pub fn least_squares_projection(
    a: &MaxPlusMatrix,
    p: &Pattern,
    y: &MaxPlusVector,
) -> (Vec<f64>, Vec<f64>) {
    let (n, d) = (a.rows(), a.cols());
    // Union of columns sharing an argmax set.
    let mut label: Vec<usize> = (0..d).collect();
    fn root(l: &mut [usize], j: usize) -> usize {
        let mut j = j;
        while l[j] != j {
            j = l[j];
        }
        j
    }
    for i in 0..n {
        let set = p.row(i);
        for w in set.windows(2) {
            let (r0, r1) = (root(&mut label, w[0]), root(&mut label, w[1]));
            label[r0.max(r1)] = r0.min(r1);
        }
    }
    let support = p.support();
    let mut roots: Vec<usize> = support.iter().map(|&j| root(&mut label, j)).collect();
    roots.sort_unstable();
    roots.dedup();
    // Inside a class x_j = t_c - off_j, with offsets from any tight row.
    let mut off = vec![f64::NAN; d];
    for &r in &roots {
        off[r] = 0.0;
    }
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            let set = p.row(i);
            for &j in set {
                for &k in set {
                    if off[j].is_finite() && off[k].is_nan() {
                        // a_ij + x_j = a_ik + x_k
                        off[k] = off[j] + a.get(i, k).value() - a.get(i, j).value();
                        changed = true;
                    }
                }
            }
        }
    }
    let c = roots.len();
    let class_idx =
        |j: usize, label: &mut Vec<usize>| roots.iter().position(|&r| r == root(label, j)).unwrap();
    // Row i depends on its first member: e_i t_{c(i)} + a_ij - off_j.
    let mut col = Vec::with_capacity(n);
    let mut base = Vec::with_capacity(n);
    for i in 0..n {
        let j = p.row(i)[0];
        col.push(class_idx(j, &mut label));
        base.push(a.get(i, j).value() - off[j]);
    }
    let mut m = vec![vec![0.0; c]; c];
    let mut r = vec![0.0; c];
    for i in 0..n {
        m[col[i]][col[i]] += 1.0;
        r[col[i]] += y[i].value() - base[i];
    }
    let t = solve_dense(m, r);
    let phi: Vec<f64> = (0..n).map(|i| t[col[i]] + base[i]).collect();
    let mut pre = vec![NI; d];
    for &j in &support {
        pre[j] = t[class_idx(j, &mut label)] - off[j];
    }
    (phi, pre)
}

/// `x in Cl(X(P))`: every member of `P_i` attains the row max within `tol`.
pub fn in_closure(a: &MaxPlusMatrix, p: &Pattern, x: &[f64], tol: f64) -> bool {
    (0..a.rows()).all(|i| {
        let vals: Vec<f64> = (0..a.cols())
            .map(|j| {
                let aij = a.get(i, j);
                if aij.is_neg_inf() || x[j] == NI {
                    NI
                } else {
                    aij.value() + x[j]
                }
            })
            .collect();
        let top = vals.iter().cloned().fold(NI, f64::max);
        top > NI && p.row(i).iter().all(|&j| vals[j] >= top - tol)
    })
}

/// `||A ⊗ x - y||_2` evaluated directly.
pub fn residual_direct(a: &MaxPlusMatrix, y: &MaxPlusVector, x: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.rows() {
        let mut top = NI;
        for j in 0..a.cols() {
            let aij = a.get(i, j);
            if aij.is_finite() && x[j] > NI {
                top = top.max(aij.value() + x[j]);
            }
        }
        let yi = y[i];
        if yi.is_neg_inf() && top == NI {
            continue;
        }
        if yi.is_neg_inf() || top == NI {
            return f64::INFINITY;
        }
        s += (top - yi.value()).powi(2);
    }
    s.sqrt()
}

/// Grid minimum of the 2-norm residual over `[lo, hi]^2` with step `h`.
pub fn grid_min_2d(a: &MaxPlusMatrix, y: &MaxPlusVector, lo: f64, hi: f64, h: f64) -> f64 {
    let steps = ((hi - lo) / h).round() as usize;
    let mut best = f64::INFINITY;
    for s in 0..=steps {
        let x0 = lo + s as f64 * h;
        for t in 0..=steps {
            let x1 = lo + t as f64 * h;
            best = best.min(residual_direct(a, y, &[x0, x1]));
        }
    }
    best
}

pub fn ext(v: f64) -> ExtReal {
    ExtReal::new(v).unwrap()
}
