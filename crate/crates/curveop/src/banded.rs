//! Banded matrices with exactness-aware finite sections, sparse ranged
//! columns, and a band Cholesky factorization.
//!
//! Every sectioned infinite operator records `exact_rows`: how many leading
//! rows agree with the infinite operator. Consumers must check before reading
//! near the truncation edge; [`BandedMatrix::matvec_ranged`] enforces this.

use crate::error::{Error, Result};

/// Relative pivot tolerance for positive definiteness in [`cholesky_banded`].
pub const PIVOT_TOL: f64 = 1e-13;

/// A banded `nrows x ncols` matrix with `lower` sub-diagonals and `upper`
/// super-diagonals. Storage is contiguous per diagonal; the layout is
/// internal and never appears in file formats.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    nrows: usize,
    ncols: usize,
    lower: usize,
    upper: usize,
    /// `diags[t]` holds the diagonal with offset `t as isize - lower as isize`
    /// (column index minus row index); entry `k` of diagonal `off` sits at
    /// `(k + max(0, -off), k + max(0, off))`.
    diags: Vec<Vec<f64>>,
    exact_rows: usize,
    symmetric: bool,
}

impl BandedMatrix {
    pub fn zeros(nrows: usize, ncols: usize, lower: usize, upper: usize) -> Self {
        let mut diags = Vec::with_capacity(lower + upper + 1);
        for t in 0..=(lower + upper) {
            let off = t as isize - lower as isize;
            let len = Self::diag_len(nrows, ncols, off);
            diags.push(vec![0.0; len]);
        }
        BandedMatrix {
            nrows,
            ncols,
            lower,
            upper,
            diags,
            exact_rows: nrows,
            symmetric: false,
        }
    }

    fn diag_len(nrows: usize, ncols: usize, off: isize) -> usize {
        let r0 = (-off).max(0) as usize;
        let c0 = off.max(0) as usize;
        if r0 >= nrows || c0 >= ncols {
            0
        } else {
            (nrows - r0).min(ncols - c0)
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Bandwidths `(lower, upper)`.
    pub fn bandwidths(&self) -> (usize, usize) {
        (self.lower, self.upper)
    }

    pub fn exact_rows(&self) -> usize {
        self.exact_rows
    }

    pub fn set_exact_rows(&mut self, rows: usize) {
        self.exact_rows = rows.min(self.nrows);
    }

    pub fn set_symmetric(&mut self, symmetric: bool) {
        self.symmetric = symmetric;
    }

    pub fn is_symmetric_flagged(&self) -> bool {
        self.symmetric
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<(usize, usize)> {
        let off = j as isize - i as isize;
        if off < -(self.lower as isize) || off > self.upper as isize {
            return None;
        }
        let t = (off + self.lower as isize) as usize;
        let k = i.min(j);
        Some((t, k))
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.nrows && j < self.ncols, "index out of bounds");
        match self.slot(i, j) {
            Some((t, k)) => self.diags[t][k],
            None => 0.0,
        }
    }

    /// Sets entry `(i, j)`; panics if outside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.nrows && j < self.ncols, "index out of bounds");
        let (t, k) = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("({}, {}) outside band ({}, {})", i, j, self.lower, self.upper));
        self.diags[t][k] = v;
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut out = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let j0 = i.saturating_sub(self.lower);
            let j1 = (i + self.upper).min(self.ncols - 1);
            for j in j0..=j1 {
                out[(i, j)] = self.get(i, j);
            }
        }
        out
    }

    /// Max `|A_{ij} - A_{ji}|` over the exact leading section.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.exact_rows.min(self.nrows).min(self.ncols);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let j1 = (i + self.upper.max(self.lower)).min(n - 1);
            for j in i..=j1 {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Banded matrix-vector product restricted to a contiguous nonzero range.
    ///
    /// Requires the input range plus the bandwidth buffer to lie within the
    /// exact rows, otherwise the output would mix truncated data.
    pub fn matvec_ranged(&self, v: &RangedVec) -> Result<RangedVec> {
        let needed = v.hi() + self.lower.max(self.upper) + 1;
        if needed > self.exact_rows {
            return Err(Error::TruncationOverflow {
                needed,
                exact: self.exact_rows,
            });
        }
        let lo = v.lo().saturating_sub(self.upper);
        let hi = (v.hi() + self.lower).min(self.nrows - 1);
        let mut out = RangedVec::zeros(lo, hi);
        for i in lo..=hi {
            let j0 = i.saturating_sub(self.lower).max(v.lo());
            let j1 = (i + self.upper).min(v.hi());
            let mut acc = 0.0;
            for j in j0..=j1 {
                acc += self.get(i, j) * v.get(j);
            }
            out.set(i, acc);
        }
        Ok(out)
    }

    /// Dense matvec over the full section, for oracles and tests.
    pub fn matvec_dense(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.ncols);
        let mut out = vec![0.0; self.nrows];
        for (i, o) in out.iter_mut().enumerate() {
            let j0 = i.saturating_sub(self.lower);
            let j1 = (i + self.upper).min(self.ncols - 1);
            for j in j0..=j1 {
                *o += self.get(i, j) * v[j];
            }
        }
        out
    }

    /// Banded product `self * rhs`; bandwidths add.
    pub fn mul_banded(&self, rhs: &BandedMatrix) -> BandedMatrix {
        assert_eq!(self.ncols, rhs.nrows);
        let lower = self.lower + rhs.lower;
        let upper = self.upper + rhs.upper;
        let mut out = BandedMatrix::zeros(self.nrows, rhs.ncols, lower, upper);
        for i in 0..self.nrows {
            let j0 = i.saturating_sub(lower);
            let j1 = (i + upper).min(rhs.ncols.saturating_sub(1));
            if j1 < j0 && rhs.ncols == 0 {
                continue;
            }
            for j in j0..=j1 {
                let k0 = i.saturating_sub(self.lower).max(j.saturating_sub(rhs.upper));
                let k1 = (i + self.upper).min(j + rhs.lower).min(self.ncols - 1);
                let mut acc = 0.0;
                for k in k0..=k1 {
                    acc += self.get(i, k) * rhs.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn transpose(&self) -> BandedMatrix {
        let mut out = BandedMatrix::zeros(self.ncols, self.nrows, self.upper, self.lower);
        for i in 0..self.nrows {
            let j0 = i.saturating_sub(self.lower);
            let j1 = (i + self.upper).min(self.ncols - 1);
            for j in j0..=j1 {
                out.set(j, i, self.get(i, j));
            }
        }
        out.exact_rows = self.exact_rows.min(out.nrows);
        out
    }
}

/// Lower Cholesky factor of a symmetric positive definite banded matrix.
///
/// The factor has bandwidths `(b, 0)` where `b` is the input's lower
/// bandwidth. Cholesky entries depend only on the leading principal
/// submatrix, so rows `0..exact_rows` of the factor equal those of the
/// factor of the infinite operator.
pub fn cholesky_banded(a: &BandedMatrix) -> Result<BandedMatrix> {
    let n = a.nrows().min(a.ncols());
    let b = a.bandwidths().0;
    let mut l = BandedMatrix::zeros(n, n, b, 0);
    let mut max_diag: f64 = 0.0;
    for j in 0..n {
        max_diag = max_diag.max(a.get(j, j).abs());
        let mut s = a.get(j, j);
        let k0 = j.saturating_sub(b);
        for k in k0..j {
            let v = l.get(j, k);
            s -= v * v;
        }
        if s <= PIVOT_TOL * max_diag {
            return Err(Error::NotPositiveDefinite { index: j, pivot: s });
        }
        let d = s.sqrt();
        l.set(j, j, d);
        let i1 = (j + b).min(n - 1);
        for i in (j + 1)..=i1 {
            let mut s = a.get(i, j);
            let k0 = i.saturating_sub(b);
            for k in k0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / d);
        }
    }
    l.set_exact_rows(a.exact_rows());
    Ok(l)
}

/// A column vector that is zero outside a contiguous index range.
#[derive(Debug, Clone)]
pub struct RangedVec {
    lo: usize,
    vals: Vec<f64>,
}

impl RangedVec {
    pub fn zeros(lo: usize, hi: usize) -> Self {
        assert!(hi >= lo);
        RangedVec {
            lo,
            vals: vec![0.0; hi - lo + 1],
        }
    }

    pub fn from_slice(lo: usize, vals: &[f64]) -> Self {
        assert!(!vals.is_empty());
        RangedVec {
            lo,
            vals: vals.to_vec(),
        }
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.lo + self.vals.len() - 1
    }

    pub fn get(&self, i: usize) -> f64 {
        if i < self.lo || i > self.hi() {
            0.0
        } else {
            self.vals[i - self.lo]
        }
    }

    pub fn set(&mut self, i: usize, v: f64) {
        assert!(i >= self.lo && i <= self.hi(), "index outside range");
        self.vals[i - self.lo] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    /// Re-allocates over `[lo, hi]`, keeping overlapping values.
    pub fn expand(&self, lo: usize, hi: usize) -> RangedVec {
        let lo = lo.min(self.lo);
        let hi = hi.max(self.hi());
        let mut out = RangedVec::zeros(lo, hi);
        for i in self.lo..=self.hi() {
            out.set(i, self.get(i));
        }
        out
    }

    pub fn dot(&self, other: &RangedVec) -> f64 {
        let lo = self.lo.max(other.lo);
        let hi = self.hi().min(other.hi());
        if lo > hi {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in lo..=hi {
            acc += self.get(i) * other.get(i);
        }
        acc
    }

    /// `self += c * other` on the overlap with this vector's range.
    pub fn axpy_clipped(&mut self, c: f64, other: &RangedVec) {
        let lo = self.lo.max(other.lo);
        let hi = self.hi().min(other.hi());
        for i in lo..=hi.min(self.hi()) {
            let v = self.get(i) + c * other.get(i);
            self.set(i, v);
        }
    }

    pub fn norm(&self) -> f64 {
        self.vals.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.vals {
            *v *= s;
        }
    }

    /// Zeroes entries outside `[lo, hi]`.
    pub fn truncate_outside(&mut self, lo: usize, hi: usize) {
        for i in self.lo..=self.hi() {
            if i < lo || i > hi {
                self.set(i, 0.0);
            }
        }
    }
}
