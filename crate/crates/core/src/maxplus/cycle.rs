//! Maximum cycle mean and Kleene star of square max-plus matrices.

use super::matrix::{require_square, MaxPlusMatrix, MaxPlusVector};
use super::scalar::ExtReal;
use crate::error::{Error, Result};

/// Absolute tolerance for comparing cycle means and star diagonals with 0.
pub const CYCLE_TOL: f64 = 1e-9;

/// Maximum cycle mean `λ(B)` by Karp's algorithm, `O(d³)`.
///
/// Edge `i -> j` carries weight `b_ij`; `-inf` entries are absent edges.
/// Returns `-inf` when the finite-weight digraph has no cycle.
#[allow(clippy::needless_range_loop)]
pub fn max_cycle_mean(b: &MaxPlusMatrix) -> Result<ExtReal> {
    require_square(b)?;
    let d = b.rows();
    if d == 0 {
        return Ok(ExtReal::NEG_INF);
    }
    // walk[k][v]: heaviest walk of exactly k edges ending at v, starting anywhere.
    let mut walk = vec![vec![f64::NEG_INFINITY; d]; d + 1];
    walk[0].fill(0.0);
    for k in 1..=d {
        for u in 0..d {
            let wu = walk[k - 1][u];
            if wu == f64::NEG_INFINITY {
                continue;
            }
            for v in 0..d {
                let e = b.get(u, v);
                if e.is_finite() {
                    let cand = wu + e.value();
                    if cand > walk[k][v] {
                        walk[k][v] = cand;
                    }
                }
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    for v in 0..d {
        let full = walk[d][v];
        if full == f64::NEG_INFINITY {
            continue;
        }
        let worst = (0..d)
            .filter(|&k| walk[k][v] != f64::NEG_INFINITY)
            .map(|k| (full - walk[k][v]) / (d - k) as f64)
            .fold(f64::INFINITY, f64::min);
        best = best.max(worst);
    }
    Ok(ExtReal::from_raw(best))
}

/// Kleene star `B* = I ⊕ B ⊕ B^2 ⊕ ...` as a longest-path closure.
///
/// Fails with [`Error::PositiveCycleMean`] as soon as a diagonal entry of the
/// closure exceeds 0 by more than [`CYCLE_TOL`].
pub fn kleene_star(b: &MaxPlusMatrix) -> Result<MaxPlusMatrix> {
    require_square(b)?;
    let d = b.rows();
    let mut s: Vec<f64> = b.entries().iter().map(|x| x.value()).collect();
    for i in 0..d {
        if s[i * d + i] > CYCLE_TOL {
            return Err(positive_cycle(b));
        }
    }
    for k in 0..d {
        for i in 0..d {
            let sik = s[i * d + k];
            if sik == f64::NEG_INFINITY {
                continue;
            }
            for j in 0..d {
                let skj = s[k * d + j];
                if skj == f64::NEG_INFINITY {
                    continue;
                }
                let cand = sik + skj;
                if cand > s[i * d + j] {
                    s[i * d + j] = cand;
                }
            }
        }
        for i in 0..d {
            if s[i * d + i] > CYCLE_TOL {
                return Err(positive_cycle(b));
            }
        }
    }
    for i in 0..d {
        s[i * d + i] = 0.0;
    }
    MaxPlusMatrix::from_entries(d, d, s.into_iter().map(ExtReal::from_raw).collect())
}

fn positive_cycle(b: &MaxPlusMatrix) -> Error {
    let lambda = max_cycle_mean(b).map(|l| l.value()).unwrap_or(f64::NAN);
    Error::PositiveCycleMean { lambda }
}

/// Row-wise arithmetic mean of the columns of a star, over finite entries only.
///
/// Rows without any finite entry yield `-inf`.
pub fn star_column_mean(star: &MaxPlusMatrix) -> MaxPlusVector {
    (0..star.rows())
        .map(|i| {
            let (sum, count) = star
                .row(i)
                .iter()
                .filter(|x| x.is_finite())
                .fold((0.0, 0usize), |(s, c), x| (s + x.value(), c + 1));
            if count == 0 {
                ExtReal::NEG_INF
            } else {
                ExtReal::from_raw(sum / count as f64)
            }
        })
        .collect()
}
