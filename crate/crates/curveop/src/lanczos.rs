//! The connection-matrix engine: Gram-Schmidt in coefficient space on the
//! banded multiplication operators, which simultaneously block-tridiagonalizes
//! the commuting pair (multiplication by `x`, multiplication by `y`).
//!
//! Blocks are built degree by degree. Below the saturation degree the primary
//! sequence multiplies each column by `x` and the last by `y`; from there on
//! the secondary sequence multiplies every column by `y` (an `x`-then-`y`
//! variant exists behind a flag, and curves with `m >= d` use `x` throughout
//! since `y`-multiplication lowers the curve degree there). New columns are
//! truncated to the proven zero bounds, normalized with a positive
//! normalizer, and re-orthogonalized twice against the window of owner
//! degrees whose supports can overlap.

use crate::banded::RangedVec;
use crate::bounds::{reorth_window_start, zero_bounds};
use crate::curve::{dim_vn, ell_index, RowPart};
use crate::error::{Error, Result};
use crate::multops::MultOps;

/// One column of the connection matrix over its allocated flat-row range.
#[derive(Debug, Clone)]
pub struct ConnectionColumn {
    pub owner_degree: usize,
    /// 1-based index within the owner block.
    pub owner_index: usize,
    /// Flat column index in the degree-graded ordering.
    pub column: usize,
    /// Basis part carrying the support (m = 2 only).
    pub part: Option<RowPart>,
    /// Allocated flat-row range (proven bounds, possibly widened).
    pub jmin: usize,
    pub jmax: usize,
    vals: Vec<f64>,
}

impl ConnectionColumn {
    pub fn from_ranged(
        owner_degree: usize,
        owner_index: usize,
        column: usize,
        part: Option<RowPart>,
        jmin: usize,
        jmax: usize,
        v: &RangedVec,
    ) -> Self {
        let vals = (jmin..=jmax).map(|i| v.get(i)).collect();
        ConnectionColumn {
            owner_degree,
            owner_index,
            column,
            part,
            jmin,
            jmax,
            vals,
        }
    }

    pub fn unit(owner_degree: usize, owner_index: usize, column: usize, part: Option<RowPart>, row: usize) -> Self {
        ConnectionColumn {
            owner_degree,
            owner_index,
            column,
            part,
            jmin: row,
            jmax: row,
            vals: vec![1.0],
        }
    }

    pub fn get(&self, row: usize) -> f64 {
        if row < self.jmin || row > self.jmax {
            0.0
        } else {
            self.vals[row - self.jmin]
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    pub fn to_ranged(&self) -> RangedVec {
        RangedVec::from_slice(self.jmin, &self.vals)
    }

    pub fn norm(&self) -> f64 {
        self.vals.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot_ranged(&self, v: &RangedVec) -> f64 {
        let lo = self.jmin.max(v.lo());
        let hi = self.jmax.min(v.hi());
        if lo > hi {
            return 0.0;
        }
        (lo..=hi).map(|i| self.get(i) * v.get(i)).sum()
    }

    pub fn dot(&self, other: &ConnectionColumn) -> f64 {
        let lo = self.jmin.max(other.jmin);
        let hi = self.jmax.min(other.jmax);
        if lo > hi {
            return 0.0;
        }
        (lo..=hi).map(|i| self.get(i) * other.get(i)).sum()
    }

    /// Sign of the first (lowest-row) entry exceeding the tolerance.
    pub fn leading_sign(&self, tol: f64) -> f64 {
        for &v in &self.vals {
            if v.abs() > tol {
                return v.signum();
            }
        }
        1.0
    }

    pub fn flip_sign(&mut self) {
        for v in &mut self.vals {
            *v = -*v;
        }
    }
}

/// Engine options; defaults reproduce the stabilized reference pipeline.
#[derive(Debug, Clone)]
pub struct LanczosOptions {
    /// Windowed re-orthogonalization (on by default; off reproduces the
    /// instability of the raw recursion).
    pub reorth: bool,
    pub reorth_passes: usize,
    /// Secondary sequence variant: orthogonalize `x Y_{n,k}` for k = 2..d
    /// and then `y Y_{n,d}`, instead of `y` on every column.
    pub x_then_y_secondary: bool,
    /// Extra rows allocated beyond the proven bounds (diagnostics).
    pub allocation_slack: usize,
    pub breakdown_tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            reorth: true,
            reorth_passes: 2,
            x_then_y_secondary: false,
            allocation_slack: 0,
            breakdown_tol: 1e-10,
        }
    }
}

/// How a connection matrix was produced. Normalization-sign guarantees only
/// apply to Gram-Schmidt output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisSource {
    Engine,
    Explicit,
}

/// The connection matrix as a list of degree blocks of columns.
#[derive(Debug, Clone)]
pub struct ConnectionMatrix {
    pub m: u8,
    pub d: usize,
    pub source: BasisSource,
    /// Wall-clock seconds spent building each degree block.
    pub block_seconds: Vec<f64>,
    blocks: Vec<Vec<ConnectionColumn>>,
}

impl ConnectionMatrix {
    pub fn new(m: u8, d: usize) -> Self {
        ConnectionMatrix {
            m,
            d,
            source: BasisSource::Engine,
            block_seconds: Vec::new(),
            blocks: Vec::new(),
        }
    }

    pub fn push_block(&mut self, block: Vec<ConnectionColumn>) {
        self.blocks.push(block);
    }

    /// Highest computed owner degree.
    pub fn n_max(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn block(&self, n: usize) -> &[ConnectionColumn] {
        &self.blocks[n]
    }

    pub fn blocks(&self) -> &[Vec<ConnectionColumn>] {
        &self.blocks
    }

    pub fn columns(&self) -> impl Iterator<Item = &ConnectionColumn> {
        self.blocks.iter().flatten()
    }

    pub fn total_columns(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum()
    }

    /// Rows needed to hold every stored column.
    pub fn nrows(&self) -> usize {
        self.columns().map(|c| c.jmax + 1).max().unwrap_or(0)
    }

    /// Max `|C^T C - I|` over all pairs of computed columns.
    pub fn orthogonality_residual(&self) -> f64 {
        let cols: Vec<&ConnectionColumn> = self.columns().collect();
        let mut worst: f64 = 0.0;
        for (i, a) in cols.iter().enumerate() {
            for b in cols.iter().skip(i) {
                if b.jmin > a.jmax || a.jmin > b.jmax {
                    continue;
                }
                let want = if a.column == b.column { 1.0 } else { 0.0 };
                worst = worst.max((a.dot(b) - want).abs());
            }
        }
        worst
    }

    /// Achieved bandwidths `(lambda, mu)` over entries above `tol`, measured
    /// against the flat column index, restricted to owner degrees `>= from`.
    pub fn bandwidths_from(&self, from: usize, tol: f64) -> (usize, usize) {
        let mut lambda = 0usize;
        let mut mu = 0usize;
        for col in self.columns().filter(|c| c.owner_degree >= from) {
            for row in col.jmin..=col.jmax {
                if col.get(row).abs() > tol {
                    if row > col.column {
                        lambda = lambda.max(row - col.column);
                    } else {
                        mu = mu.max(col.column - row);
                    }
                }
            }
        }
        (lambda, mu)
    }

    /// Values of all OPs up to the computed degree at an on-curve point.
    pub fn eval_y(&self, ops: &MultOps, x: f64, y: f64) -> Result<Vec<f64>> {
        let jmax_flat = self.nrows() - 1;
        let jmax = match self.m {
            1 => jmax_flat,
            _ => crate::curve::row_to_part(2, jmax_flat).0.max(1),
        };
        let p = ops.pbasis_eval(x, y, jmax)?;
        Ok(self
            .columns()
            .map(|c| (c.jmin..=c.jmax).map(|r| c.get(r) * p[r]).sum())
            .collect())
    }

    /// Flips signs so each column's first nonzero entry is positive;
    /// the deterministic convention used for column-wise comparisons.
    pub fn canonicalize_signs(&mut self) {
        for block in &mut self.blocks {
            for col in block {
                if col.leading_sign(1e-12) < 0.0 {
                    col.flip_sign();
                }
            }
        }
    }
}

/// Max entrywise deviation between two connection matrices over matching
/// columns, after aligning each pair's sign by their inner product. Bases
/// are unique up to per-column signs, so this is the natural column-wise
/// distance.
pub fn max_column_deviation(a: &ConnectionMatrix, b: &ConnectionMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for (ca, cb) in a.columns().zip(b.columns()) {
        assert_eq!(ca.column, cb.column, "column ordering mismatch");
        let sign = if ca.dot(cb) < 0.0 { -1.0 } else { 1.0 };
        let lo = ca.jmin.min(cb.jmin);
        let hi = ca.jmax.max(cb.jmax);
        for row in lo..=hi {
            worst = worst.max((ca.get(row) - sign * cb.get(row)).abs());
        }
    }
    worst
}

/// One multiplication step of the orthogonalization plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// Multiply column `k` of the previous block by `x`.
    ByX(usize),
    /// Multiply column `k` of the previous block by `y`.
    ByY(usize),
}

/// The source columns and operators used to build `block` from its
/// predecessor.
pub fn extension_plan(m: u8, d: usize, block: usize, x_then_y: bool) -> Vec<Step> {
    assert!(block >= 1);
    let s = d.max(m as usize);
    let n = block - 1;
    if n + 2 <= s {
        // primary sequence: the block grows by one column
        let mut plan: Vec<Step> = (1..=n + 1).map(Step::ByX).collect();
        plan.push(Step::ByY(n + 1));
        plan
    } else if m == 2 && d <= 2 {
        // y-multiplication lowers the curve degree when m >= d
        (1..=dim_vn(n, m, d)).map(Step::ByX).collect()
    } else if x_then_y {
        let mut plan: Vec<Step> = (2..=d).map(Step::ByX).collect();
        plan.push(Step::ByY(d));
        plan
    } else {
        (1..=d).map(Step::ByY).collect()
    }
}

/// Columns the candidate is projected against in the basic Gram-Schmidt
/// step: the previous two blocks.
fn basic_window(c: &ConnectionMatrix, target: usize) -> Vec<(usize, usize)> {
    let n = target - 1;
    let mut w = Vec::new();
    for s in n.saturating_sub(1)..=n {
        for k in 0..c.block(s).len() {
            w.push((s, k));
        }
    }
    w
}

/// Owner degrees whose supports can overlap the new block.
fn reorth_window(c: &ConnectionMatrix, target: usize) -> Vec<(usize, usize)> {
    let start = reorth_window_start(c.m, c.d, target);
    let mut w = Vec::new();
    for s in start..target {
        for k in 0..c.block(s).len() {
            w.push((s, k));
        }
    }
    w
}

/// Builds one column of block `target` from the state in `c` and the
/// already-built columns of the same block.
fn build_column(
    ops: &MultOps,
    opts: &LanczosOptions,
    c: &ConnectionMatrix,
    new_block: &[ConnectionColumn],
    target: usize,
    k_new: usize,
    step: Step,
) -> Result<ConnectionColumn> {
    let m = c.m;
    let d = c.d;
    let (by_y, src_k) = match step {
        Step::ByX(k) => (false, k),
        Step::ByY(k) => (true, k),
    };
    let src = &c.block(target - 1)[src_k - 1];
    let mv = ops.op(by_y).matvec_ranged(&src.to_ranged())?;

    let zb = zero_bounds(m, d, target, k_new);
    let alloc_lo = zb.jmin.saturating_sub(opts.allocation_slack);
    let alloc_hi = (zb.jmax + opts.allocation_slack).min(ops.flat_rows() - 1);

    // span envelope: matvec output, allocation, and every column we project
    // against, so clipped updates lose nothing
    let basic = basic_window(c, target);
    let window = if opts.reorth {
        reorth_window(c, target)
    } else {
        Vec::new()
    };
    let mut lo = mv.lo().min(alloc_lo);
    let mut hi = mv.hi().max(alloc_hi);
    for &(s, k) in basic.iter().chain(&window) {
        let col = &c.block(s)[k];
        lo = lo.min(col.jmin);
        hi = hi.max(col.jmax);
    }
    for col in new_block {
        lo = lo.min(col.jmin);
        hi = hi.max(col.jmax);
    }
    let mut v = mv.expand(lo, hi);

    let breakdown = |norm: f64| Error::LanczosBreakdown {
        n: target,
        k: k_new,
        value: norm,
    };

    // basic step: subtract the projections onto the previous two blocks and
    // the columns of this block built so far, with coefficients taken from
    // the raw candidate (they are the recurrence entries). This one-shot
    // recursion is numerically unstable on its own; re-orthogonalization
    // below restores orthogonality.
    {
        let coefs: Vec<f64> = basic
            .iter()
            .map(|&(s, k)| c.block(s)[k].dot_ranged(&v))
            .chain(new_block.iter().map(|col| col.dot_ranged(&v)))
            .collect();
        for (&(s, k), &coef) in basic.iter().zip(&coefs) {
            v.axpy_clipped(-coef, &c.block(s)[k].to_ranged());
        }
        for (col, &coef) in new_block.iter().zip(coefs.iter().skip(basic.len())) {
            v.axpy_clipped(-coef, &col.to_ranged());
        }
    }
    v.truncate_outside(alloc_lo, alloc_hi);
    let norm = v.norm();
    if norm < opts.breakdown_tol {
        return Err(breakdown(norm));
    }
    v.scale(1.0 / norm);

    if opts.reorth {
        for _ in 0..opts.reorth_passes {
            let coefs: Vec<f64> = window
                .iter()
                .map(|&(s, k)| c.block(s)[k].dot_ranged(&v))
                .chain(new_block.iter().map(|col| col.dot_ranged(&v)))
                .collect();
            for (&(s, k), &coef) in window.iter().zip(&coefs) {
                v.axpy_clipped(-coef, &c.block(s)[k].to_ranged());
            }
            for (col, &coef) in new_block.iter().zip(coefs.iter().skip(window.len())) {
                v.axpy_clipped(-coef, &col.to_ranged());
            }
            v.truncate_outside(alloc_lo, alloc_hi);
            let norm = v.norm();
            if norm < opts.breakdown_tol {
                return Err(breakdown(norm));
            }
            v.scale(1.0 / norm);
        }
    }

    let ell = ell_index(target, k_new, m, d)?;
    Ok(ConnectionColumn::from_ranged(
        target, k_new, ell, zb.parity, alloc_lo, alloc_hi, &v,
    ))
}

/// Extends the basis by one degree: builds block `target` from the blocks
/// stored in `c` (which must reach degree `target - 1`), following the
/// primary or secondary orthogonalization sequence.
pub fn extend_block(
    ops: &MultOps,
    opts: &LanczosOptions,
    c: &ConnectionMatrix,
    target: usize,
) -> Result<Vec<ConnectionColumn>> {
    let plan = extension_plan(c.m, c.d, target, opts.x_then_y_secondary);
    debug_assert_eq!(plan.len(), dim_vn(target, c.m, c.d));
    let mut new_block = Vec::with_capacity(plan.len());
    for (pos, step) in plan.iter().enumerate() {
        let col = build_column(ops, opts, c, &new_block, target, pos + 1, *step)?;
        new_block.push(col);
    }
    Ok(new_block)
}

/// Per-column truncation diagnostics.
#[derive(Debug, Clone, Copy, Default)]
pub struct TruncationCheck {
    /// Largest entry found outside the proven bounds when each column is
    /// recomputed with a widened allocation against the stored state.
    pub max_outside: f64,
    /// Largest in-band change the widened allocation produces.
    pub max_inband_change: f64,
}

/// Recomputes every column with `slack` extra rows against the tight stored
/// state, measuring the mass the proven bounds drop and its effect in band.
pub fn truncation_check(
    ops: &MultOps,
    c: &ConnectionMatrix,
    opts: &LanczosOptions,
    slack: usize,
) -> Result<TruncationCheck> {
    let mut out = TruncationCheck::default();
    let wide = LanczosOptions {
        allocation_slack: slack,
        ..opts.clone()
    };
    for target in 1..=c.n_max() {
        let plan = extension_plan(c.m, c.d, target, opts.x_then_y_secondary);
        for (pos, step) in plan.iter().enumerate() {
            let stored = &c.block(target)[pos];
            let redone = build_column(
                ops,
                &wide,
                c,
                &c.block(target)[..pos],
                target,
                pos + 1,
                *step,
            )?;
            let zb = zero_bounds(c.m, c.d, target, pos + 1);
            for row in redone.jmin..=redone.jmax {
                let v = redone.get(row).abs();
                if row < zb.jmin || row > zb.jmax {
                    out.max_outside = out.max_outside.max(v);
                }
            }
            for row in zb.jmin..=zb.jmax {
                out.max_inband_change = out
                    .max_inband_change
                    .max((redone.get(row) - stored.get(row)).abs());
            }
        }
    }
    Ok(out)
}

/// Runs the engine up to degree `n_max`, returning the connection matrix.
pub fn connection_matrix(
    ops: &MultOps,
    n_max: usize,
    opts: &LanczosOptions,
) -> Result<ConnectionMatrix> {
    let d = ops.curve().degree();
    let need = zero_bounds(ops.curve().m, d, n_max.max(1), dim_vn(n_max.max(1), ops.curve().m, d))
        .jmax
        + opts.allocation_slack;
    if need > ops.required_rows() {
        return Err(Error::SectionTooSmall(format!(
            "operators sized for {} flat rows but degree {} needs {}",
            ops.required_rows(),
            n_max,
            need
        )));
    }
    let m = ops.curve().m;
    let mut c = ConnectionMatrix::new(m, d);
    let part = if m == 2 { Some(RowPart::Base) } else { None };
    c.push_block(vec![ConnectionColumn::unit(0, 1, 0, part, 0)]);
    for target in 1..=n_max {
        let start = std::time::Instant::now();
        let block = extend_block(ops, opts, &c, target)?;
        c.push_block(block);
        c.block_seconds.push(start.elapsed().as_secs_f64());
    }
    Ok(c)
}

/// Re-orthogonalizes a single column against the window of owner degrees
/// that can overlap it, renormalizing; applied `passes` times.
pub fn reorthogonalize(
    c: &ConnectionMatrix,
    column: &ConnectionColumn,
    passes: usize,
    breakdown_tol: f64,
) -> Result<ConnectionColumn> {
    let target = column.owner_degree;
    let start = reorth_window_start(c.m, c.d, target);
    let v = column.to_ranged();
    let mut lo = v.lo();
    let mut hi = v.hi();
    for s in start..=target.min(c.n_max()) {
        for col in c.block(s) {
            if col.column != column.column {
                lo = lo.min(col.jmin);
                hi = hi.max(col.jmax);
            }
        }
    }
    let mut v = v.expand(lo, hi);
    for _ in 0..passes {
        for s in start..=target.min(c.n_max()) {
            for col in c.block(s) {
                if col.column == column.column {
                    continue;
                }
                let coef = col.dot_ranged(&v);
                v.axpy_clipped(-coef, &col.to_ranged());
            }
        }
        v.truncate_outside(column.jmin, column.jmax);
        let norm = v.norm();
        if norm < breakdown_tol {
            return Err(Error::LanczosBreakdown {
                n: target,
                k: column.owner_index,
                value: norm,
            });
        }
        v.scale(1.0 / norm);
    }
    Ok(ConnectionColumn::from_ranged(
        column.owner_degree,
        column.owner_index,
        column.column,
        column.part,
        column.jmin,
        column.jmax,
        &v,
    ))
}
