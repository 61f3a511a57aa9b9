use std::ops::Index;

use super::scalar::ExtReal;
use crate::error::{check_dim, Error, Result};

/// Dense vector over `R ∪ {-inf}`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MaxPlusVector {
    entries: Vec<ExtReal>,
}

impl MaxPlusVector {
    pub fn new(entries: Vec<ExtReal>) -> Self {
        MaxPlusVector { entries }
    }

    /// Builds a vector from raw floats, rejecting NaN and `+inf`.
    pub fn from_f64(values: &[f64]) -> Result<Self> {
        values
            .iter()
            .map(|&v| ExtReal::new(v))
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn neg_inf(len: usize) -> Self {
        Self::new(vec![ExtReal::NEG_INF; len])
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(vec![ExtReal::ZERO; len])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ExtReal] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = ExtReal> + '_ {
        self.entries.iter().copied()
    }

    /// Raw `f64` values, `-inf` included.
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|x| x.value()).collect()
    }

    pub fn into_entries(self) -> Vec<ExtReal> {
        self.entries
    }

    /// Indices (0-based) of the finite entries.
    pub fn support(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(i, x)| x.is_finite().then_some(i))
            .collect()
    }

    pub fn is_all_finite(&self) -> bool {
        self.entries.iter().all(|x| x.is_finite())
    }

    /// Gathers the entries at `indices`.
    pub fn select(&self, indices: &[usize]) -> MaxPlusVector {
        MaxPlusVector::new(indices.iter().map(|&i| self.entries[i]).collect())
    }
}

impl Index<usize> for MaxPlusVector {
    type Output = ExtReal;
    fn index(&self, i: usize) -> &ExtReal {
        &self.entries[i]
    }
}

impl FromIterator<ExtReal> for MaxPlusVector {
    fn from_iter<I: IntoIterator<Item = ExtReal>>(iter: I) -> Self {
        MaxPlusVector::new(iter.into_iter().collect())
    }
}

/// Dense row-major matrix over `R ∪ {-inf}`. The shape is fixed at construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxPlusMatrix {
    rows: usize,
    cols: usize,
    data: Vec<ExtReal>,
}

impl MaxPlusMatrix {
    pub fn from_entries(rows: usize, cols: usize, data: Vec<ExtReal>) -> Result<Self> {
        check_dim("matrix entries", rows * cols, data.len())?;
        Ok(MaxPlusMatrix { rows, cols, data })
    }

    /// Builds a matrix from raw rows. All rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            check_dim("matrix row length", cols, row.len())?;
            for &v in row {
                data.push(ExtReal::new(v)?);
            }
        }
        Ok(MaxPlusMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn filled(rows: usize, cols: usize, value: ExtReal) -> Self {
        MaxPlusMatrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    /// Max-plus identity: zeros on the diagonal, `-inf` elsewhere.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::filled(n, n, ExtReal::NEG_INF);
        for i in 0..n {
            m.data[i * n + i] = ExtReal::ZERO;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> ExtReal {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, value: ExtReal) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[ExtReal] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> MaxPlusVector {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn entries(&self) -> &[ExtReal] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.value()).collect())
            .collect()
    }

    pub fn transpose(&self) -> MaxPlusMatrix {
        let mut t = Self::filled(self.cols, self.rows, ExtReal::NEG_INF);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Sub-matrix on the given row and column index sets.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> MaxPlusMatrix {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            for &j in cols {
                data.push(self.get(i, j));
            }
        }
        MaxPlusMatrix {
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &MaxPlusMatrix) -> Result<MaxPlusMatrix> {
        check_dim("vstack columns", self.cols, other.cols)?;
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(MaxPlusMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Entrywise `⊕`.
    pub fn oplus(&self, other: &MaxPlusMatrix) -> Result<MaxPlusMatrix> {
        check_dim("oplus rows", self.rows, other.rows)?;
        check_dim("oplus cols", self.cols, other.cols)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.oplus(*b))
            .collect();
        Ok(MaxPlusMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Largest and smallest finite entries, if any.
    pub fn finite_range(&self) -> Option<(f64, f64)> {
        finite_range(self.data.iter().copied())
    }
}

pub(crate) fn finite_range(values: impl Iterator<Item = ExtReal>) -> Option<(f64, f64)> {
    values.filter(|x| x.is_finite()).fold(None, |acc, x| {
        let v = x.value();
        Some(match acc {
            None => (v, v),
            Some((lo, hi)) => (lo.min(v), hi.max(v)),
        })
    })
}

/// `(A ⊗ x)_i = max_j (a_ij + x_j)`.
pub fn mat_vec(a: &MaxPlusMatrix, x: &MaxPlusVector) -> Result<MaxPlusVector> {
    check_dim("mat_vec", a.cols(), x.len())?;
    Ok((0..a.rows())
        .map(|i| {
            a.row(i)
                .iter()
                .zip(x.entries())
                .fold(ExtReal::NEG_INF, |acc, (aij, xj)| {
                    acc.oplus(aij.otimes(*xj))
                })
        })
        .collect())
}

/// `(A ⊗ B)_ij = max_k (a_ik + b_kj)`.
pub fn mat_mat(a: &MaxPlusMatrix, b: &MaxPlusMatrix) -> Result<MaxPlusMatrix> {
    check_dim("mat_mat", a.cols(), b.rows())?;
    let mut out = MaxPlusMatrix::filled(a.rows(), b.cols(), ExtReal::NEG_INF);
    for i in 0..a.rows() {
        for k in 0..a.cols() {
            let aik = a.get(i, k);
            if aik.is_neg_inf() {
                continue;
            }
            for j in 0..b.cols() {
                let cand = aik.otimes(b.get(k, j));
                let cur = out.get(i, j);
                out.set(i, j, cur.oplus(cand));
            }
        }
    }
    Ok(out)
}

/// Support of a vector (0-based indices of finite entries).
pub fn support(x: &MaxPlusVector) -> Vec<usize> {
    x.support()
}

/// Checks that every row has at least one finite entry.
pub fn first_all_neg_inf_row(a: &MaxPlusMatrix) -> Option<usize> {
    (0..a.rows()).find(|&i| a.row(i).iter().all(|x| x.is_neg_inf()))
}

pub(crate) fn require_square(a: &MaxPlusMatrix) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        })
    }
}
