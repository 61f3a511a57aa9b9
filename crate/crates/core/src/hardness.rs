//! Set cover instances and their reduction to the descent-direction problem.
//!
//! A family `F_1, ..., F_m` covering `{1, ..., n}` has a subcover of size at
//! most `k` exactly when the zero vector admits a descent direction for a
//! structured `{0, -inf}` regression problem with
//! `N = n + m + m(m-1)/2 + 1` rows. Descent from zero is decided by brute
//! force over binary directions, which is complete for this problem class.
//!
//! Elements and set indices are 0-based in the API and 1-based in text.

use std::fmt;

use crate::error::{Error, Result};
use crate::exec::{any_index, Execution};
use crate::maxplus::{ExtReal, MaxPlusMatrix, MaxPlusVector};
use crate::rng::Rng;
use crate::solvers::RegressionProblem;
use crate::text::{
    expect_count, matrix_to_vector, parse_error, parse_usize, read_matrix_block, write_matrix,
    write_vector, Lines, Token,
};

/// Largest family the set-cover enumeration accepts.
pub const MAX_SETCOVER_SETS: usize = 20;
/// Largest column count for the binary descent enumeration.
pub const MAX_DESCENT_COLS: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetCoverInstance {
    n: usize,
    family: Vec<Vec<usize>>,
    k: usize,
}

impl SetCoverInstance {
    /// Sets are sorted and de-duplicated. Requires `∪F = {0..n}` and `1 < k < m`.
    pub fn new(n: usize, family: Vec<Vec<usize>>, k: usize) -> Result<Self> {
        let m = family.len();
        if !(1 < k && k < m) {
            return Err(Error::Precondition(format!(
                "budget k = {k} must satisfy 1 < k < m = {m}"
            )));
        }
        let mut family = family;
        let mut covered = vec![false; n];
        for set in &mut family {
            set.sort_unstable();
            set.dedup();
            for &e in set.iter() {
                if e >= n {
                    return Err(Error::IndexOutOfRange { index: e, len: n });
                }
                covered[e] = true;
            }
        }
        if let Some(e) = covered.iter().position(|c| !c) {
            return Err(Error::Precondition(format!(
                "element {} is not covered by the family",
                e + 1
            )));
        }
        Ok(SetCoverInstance { n, family, k })
    }

    /// Family in the `1;2;1,2` form, `-` for an empty set.
    pub fn parse_family(text: &str) -> Result<Vec<Vec<usize>>> {
        let bad = |msg: String| parse_error(1, 1, msg);
        text.trim()
            .split(';')
            .map(|set| {
                let set = set.trim();
                if set == "-" {
                    return Ok(Vec::new());
                }
                set.split(',')
                    .map(|e| match e.trim().parse::<usize>() {
                        Ok(0) => Err(bad("set elements are 1-based".into())),
                        Ok(v) => Ok(v - 1),
                        Err(_) => Err(bad(format!("invalid set element '{e}'"))),
                    })
                    .collect()
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.family.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn family(&self) -> &[Vec<usize>] {
        &self.family
    }

    pub fn family_text(&self) -> String {
        self.family
            .iter()
            .map(|set| {
                if set.is_empty() {
                    "-".to_string()
                } else {
                    set.iter()
                        .map(|e| (e + 1).to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                }
            })
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Scalars of the reduction for an instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReductionConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub y4: f64,
    pub rows: usize,
}

pub fn reduction_constants(sc: &SetCoverInstance) -> ReductionConstants {
    let (n, m, k) = (sc.n as f64, sc.m() as f64, sc.k as f64);
    let pairs = sc.m() * (sc.m() - 1) / 2;
    let a = m * (k + 1.0);
    let b = m - k - 1.5;
    let c = -2.0;
    ReductionConstants {
        a,
        b,
        c,
        y4: -n * a - m * b - pairs as f64 * c,
        rows: sc.n + sc.m() + pairs + 1,
    }
}

/// Stacks the membership, identity, pair and all-zero blocks.
pub fn build_reduction(sc: &SetCoverInstance) -> Result<RegressionProblem> {
    let m = sc.m();
    let consts = reduction_constants(sc);
    let mut a = MaxPlusMatrix::filled(consts.rows, m, ExtReal::NEG_INF);
    let mut y = Vec::with_capacity(consts.rows);
    for (j, set) in sc.family.iter().enumerate() {
        for &e in set {
            a.set(e, j, ExtReal::finite(0.0));
        }
    }
    y.extend(std::iter::repeat_n(consts.a, sc.n));
    let mut row = sc.n;
    for j in 0..m {
        a.set(row + j, j, ExtReal::finite(0.0));
    }
    y.extend(std::iter::repeat_n(consts.b, m));
    row += m;
    // Pairs in lexicographic order.
    for i in 0..m {
        for j in i + 1..m {
            a.set(row, i, ExtReal::finite(0.0));
            a.set(row, j, ExtReal::finite(0.0));
            row += 1;
        }
    }
    y.extend(std::iter::repeat_n(consts.c, row - sc.n - m));
    for j in 0..m {
        a.set(row, j, ExtReal::finite(0.0));
    }
    y.push(consts.y4);
    RegressionProblem::new(a, MaxPlusVector::from_f64(&y)?)
}

pub fn descent_exists_binary(a: &MaxPlusMatrix, y: &MaxPlusVector) -> Result<bool> {
    descent_exists_binary_with(a, y, Execution::default())
}

/// Whether some `z ∈ {0,1}^d \ {0}` has `<A ⊗ z, y> > 0`.
pub fn descent_exists_binary_with(
    a: &MaxPlusMatrix,
    y: &MaxPlusVector,
    exec: Execution,
) -> Result<bool> {
    let (n, d) = (a.rows(), a.cols());
    crate::error::check_dim("target length", n, y.len())?;
    if d > MAX_DESCENT_COLS {
        return Err(Error::SizeCap {
            what: "descent columns",
            value: d,
            cap: MAX_DESCENT_COLS,
        });
    }
    if !y.is_all_finite() {
        return Err(Error::Precondition("target must be finite".into()));
    }
    let mut masks = Vec::with_capacity(n);
    for i in 0..n {
        let mut mask = 0u32;
        for (j, x) in a.row(i).iter().enumerate() {
            if x.is_finite() {
                if x.value() != 0.0 {
                    return Err(Error::Precondition(
                        "matrix entries must be 0 or -inf".into(),
                    ));
                }
                mask |= 1 << j;
            }
        }
        if mask == 0 {
            return Err(Error::AllMinusInfRow { row: i });
        }
        masks.push(mask);
    }
    let ys = y.values();
    let scale: f64 = ys.iter().map(|v| v.abs()).sum::<f64>() + 1.0;
    let tol = 1e-9 * scale;
    if ys.iter().sum::<f64>().abs() > tol {
        return Err(Error::Precondition(
            "target entries must sum to zero".into(),
        ));
    }
    // (A ⊗ z)_i is 1 when row i meets the support of z, else 0.
    let inner = |z: u32| -> f64 {
        masks
            .iter()
            .zip(&ys)
            .filter(|(m, _)| *m & z != 0)
            .map(|(_, v)| v)
            .sum()
    };
    Ok(any_index(exec, (1u64 << d) - 1, |z| {
        inner(z as u32 + 1) > tol
    }))
}

/// Whether at most `k` of the sets cover everything.
pub fn setcover_bruteforce(sc: &SetCoverInstance) -> Result<bool> {
    let m = sc.m();
    if m > MAX_SETCOVER_SETS {
        return Err(Error::SizeCap {
            what: "set-cover family size",
            value: m,
            cap: MAX_SETCOVER_SETS,
        });
    }
    let words = sc.n.div_ceil(64).max(1);
    let bits: Vec<Vec<u64>> = sc
        .family
        .iter()
        .map(|set| {
            let mut w = vec![0u64; words];
            for &e in set {
                w[e / 64] |= 1 << (e % 64);
            }
            w
        })
        .collect();
    let mut full = vec![u64::MAX; words];
    if !sc.n.is_multiple_of(64) {
        full[words - 1] = (1u64 << (sc.n % 64)) - 1;
    }
    if sc.n == 0 {
        full[0] = 0;
    }
    let found = (1u32..(1u32 << m)).any(|pick| {
        if pick.count_ones() as usize > sc.k {
            return false;
        }
        let mut acc = vec![0u64; words];
        for (j, w) in bits.iter().enumerate() {
            if pick & (1 << j) != 0 {
                for (a, b) in acc.iter_mut().zip(w) {
                    *a |= b;
                }
            }
        }
        acc == full
    });
    Ok(found)
}

/// Seeded instance catalog: every family (as a multiset of nonempty subsets)
/// for `m = 3, k = 2, n <= 3` and `m = 4, k in {2, 3}, n <= 2`, then forty
/// random instances with `n <= 5, m <= 5`.
pub fn catalog(seed: u64) -> Vec<SetCoverInstance> {
    let mut out = Vec::new();
    for (m, ks, max_n) in [(3usize, &[2usize][..], 3usize), (4, &[2, 3][..], 2)] {
        for n in 1..=max_n {
            for family in multisets(m, (1u32 << n) - 1) {
                let family: Vec<Vec<usize>> = family.iter().map(|&s| bit_members(s)).collect();
                for &k in ks {
                    if let Ok(sc) = SetCoverInstance::new(n, family.clone(), k) {
                        out.push(sc);
                    }
                }
            }
        }
    }
    let mut rng = Rng::new(seed);
    for _ in 0..40 {
        let n = 1 + rng.below(5) as usize;
        let m = 3 + rng.below(3) as usize;
        let k = 2 + rng.below(m as u64 - 2) as usize;
        let mut family: Vec<Vec<usize>> = (0..m)
            .map(|_| (0..n).filter(|_| rng.unit() < 0.35).collect())
            .collect();
        for e in 0..n {
            if !family.iter().any(|s| s.contains(&e)) {
                let j = rng.below(m as u64) as usize;
                family[j].push(e);
            }
        }
        out.push(SetCoverInstance::new(n, family, k).expect("generated family covers"));
    }
    out
}

/// Nondecreasing `m`-tuples over `1..=max_mask`.
fn multisets(m: usize, max_mask: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m);
    fn rec(m: usize, lo: u32, hi: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for s in lo..=hi {
            cur.push(s);
            rec(m, s, hi, cur, out);
            cur.pop();
        }
    }
    rec(m, 1, max_mask, &mut cur, &mut out);
    out
}

fn bit_members(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask & (1 << b) != 0).collect()
}

/// A reduction instance as written by `hardgen`.
#[derive(Clone, Debug, PartialEq)]
pub struct HardInstance {
    pub setcover: SetCoverInstance,
    pub a: MaxPlusMatrix,
    pub y: MaxPlusVector,
    /// Ground truth from [`setcover_bruteforce`].
    pub cover: bool,
}

impl HardInstance {
    pub fn generate(sc: SetCoverInstance) -> Result<Self> {
        let prob = build_reduction(&sc)?;
        let cover = setcover_bruteforce(&sc)?;
        Ok(HardInstance {
            a: prob.a().clone(),
            y: prob.y().clone(),
            setcover: sc,
            cover,
        })
    }

    /// Parses a sequence of instances.
    pub fn parse_all(text: &str) -> Result<Vec<Self>> {
        let mut lines = Lines::new(text);
        let mut out = Vec::new();
        while let Some(toks) = lines.next_tokens() {
            out.push(Self::read(&toks, &mut lines)?);
        }
        Ok(out)
    }

    fn read(toks: &[Token<'_>], lines: &mut Lines<'_>) -> Result<Self> {
        if toks[0].text != "setcover" {
            return Err(parse_error(
                toks[0].line,
                toks[0].column,
                format!("expected 'setcover' sidecar, found '{}'", toks[0].text),
            ));
        }
        expect_count(toks, 6, "setcover sidecar")?;
        let value = |idx: usize, key: &str| -> Result<(&str, &Token<'_>)> {
            let t = &toks[idx];
            match t.text.split_once('=') {
                Some((k, v)) if k == key => Ok((v, t)),
                _ => Err(parse_error(
                    t.line,
                    t.column,
                    format!("expected '{key}=...'"),
                )),
            }
        };
        let num = |idx: usize, key: &str| -> Result<usize> {
            let (v, t) = value(idx, key)?;
            parse_usize(&Token {
                text: v,
                line: t.line,
                column: t.column + key.len() + 1,
            })
        };
        let n = num(1, "n")?;
        let m = num(2, "m")?;
        let k = num(3, "k")?;
        let (cover, t) = value(4, "cover")?;
        let cover = match cover {
            "true" => true,
            "false" => false,
            other => {
                return Err(parse_error(
                    t.line,
                    t.column,
                    format!("invalid cover verdict '{other}'"),
                ))
            }
        };
        let (family, t) = value(5, "family")?;
        let at = |e: Error| match e {
            Error::Parse { message, .. } => parse_error(t.line, t.column, message),
            other => parse_error(t.line, t.column, other.to_string()),
        };
        let family = SetCoverInstance::parse_family(family).map_err(at)?;
        if family.len() != m {
            return Err(parse_error(
                t.line,
                t.column,
                format!("family has {} sets, header says m={m}", family.len()),
            ));
        }
        let setcover = SetCoverInstance::new(n, family, k).map_err(at)?;
        let a = read_matrix_block(lines)?;
        let last = lines.last_line();
        let y = matrix_to_vector(&read_matrix_block(lines)?)
            .ok_or_else(|| parse_error(last + 1, 1, "target must be a vector"))?;
        if a.rows() != y.len() || a.cols() != m {
            return Err(parse_error(
                last + 1,
                1,
                "instance blocks do not match the sidecar",
            ));
        }
        Ok(HardInstance {
            setcover,
            a,
            y,
            cover,
        })
    }
}

impl fmt::Display for HardInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sc = &self.setcover;
        writeln!(
            f,
            "setcover n={} m={} k={} cover={} family={}",
            sc.n,
            sc.m(),
            sc.k,
            self.cover,
            sc.family_text()
        )?;
        f.write_str(&write_matrix(&self.a))?;
        f.write_str(&write_vector(&self.y))
    }
}
