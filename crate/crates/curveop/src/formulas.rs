//! Entrywise transcription of the connection-coefficient recursions, used as
//! a cross-check of the structured engine on small degree budgets. The two
//! paths are the same math; this one fills each column entry by entry over
//! the proven row ranges with coefficient tables computed once per block,
//! with no re-orthogonalization.

use crate::bounds::zero_bounds;
use crate::curve::{dim_vn, ell_index, row_to_part, RowPart};
use crate::error::{Error, Result};
use crate::lanczos::{ConnectionColumn, ConnectionMatrix};
use crate::multops::MultOps;
use nalgebra::DMatrix;

struct Tables {
    a_x: Vec<DMatrix<f64>>,
    a_y: Vec<DMatrix<f64>>,
    b_x: Vec<DMatrix<f64>>,
    b_y: Vec<DMatrix<f64>>,
}

/// Rows of the proven range matching the column's parity class.
fn support_rows(m: u8, d: usize, block: usize, k: usize) -> Vec<usize> {
    let zb = zero_bounds(m, d, block, k);
    (zb.jmin..=zb.jmax)
        .filter(|&row| match (m, zb.parity) {
            (2, Some(part)) => row_to_part(2, row).1 == part,
            _ => true,
        })
        .collect()
}

fn sandwich(
    ops: &MultOps,
    by_y: bool,
    from: &[ConnectionColumn],
    to: &[ConnectionColumn],
) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(to.len(), from.len());
    for (kc, col) in from.iter().enumerate() {
        let mv = ops.op(by_y).matvec_ranged(&col.to_ranged())?;
        for (r, t) in to.iter().enumerate() {
            out[(r, kc)] = t.dot_ranged(&mv);
        }
    }
    Ok(out)
}

/// Builds the connection matrix by the entrywise recursions.
pub fn connection_by_formulas(ops: &MultOps, n_max: usize) -> Result<ConnectionMatrix> {
    let curve = ops.curve();
    let m = curve.m;
    let d = curve.degree();
    if m == 2 && d <= 2 {
        return Err(Error::SectionTooSmall(
            "entrywise recursions assume degree >= 3 for m = 2".into(),
        ));
    }
    let part0 = if m == 2 { Some(RowPart::Base) } else { None };
    let mut c = ConnectionMatrix::new(m, d);
    c.push_block(vec![ConnectionColumn::unit(0, 1, 0, part0, 0)]);
    let mut tables = Tables {
        a_x: Vec::new(),
        a_y: Vec::new(),
        b_x: Vec::new(),
        b_y: Vec::new(),
    };
    finish_block_tables(ops, &c, &mut tables)?;

    for target in 1..=n_max {
        let n = target - 1;
        let dim_new = dim_vn(target, m, d);
        let mut new_block: Vec<ConnectionColumn> = Vec::with_capacity(dim_new);
        let steps: Vec<(bool, usize)> = if target <= d.max(m as usize) - 1 {
            let mut v: Vec<(bool, usize)> = (1..=n + 1).map(|k| (false, k)).collect();
            v.push((true, n + 1));
            v
        } else {
            (1..=d).map(|k| (true, k)).collect()
        };

        for (pos, &(by_y, src_k)) in steps.iter().enumerate() {
            let k_new = pos + 1;
            let src = &c.block(n)[src_k - 1];
            let mv = ops.op(by_y).matvec_ranged(&src.to_ranged())?;
            let rows = support_rows(m, d, target, k_new);

            // projection coefficients onto the columns of this block built
            // so far, from the sandwich identity
            let b_new: Vec<f64> = new_block.iter().map(|col| col.dot_ranged(&mv)).collect();

            let mut u: Vec<f64> = rows.iter().map(|&j| mv.get(j)).collect();
            for (ui, &j) in u.iter_mut().zip(&rows) {
                *ui -= projections(m, d, target, k_new, by_y, src_k, j, &c, &tables, &new_block, &b_new);
            }
            let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-10 {
                return Err(Error::LanczosBreakdown {
                    n: target,
                    k: k_new,
                    value: norm,
                });
            }
            let zb = zero_bounds(m, d, target, k_new);
            let mut v = crate::banded::RangedVec::zeros(zb.jmin, zb.jmax);
            for (&j, &ui) in rows.iter().zip(&u) {
                v.set(j, ui / norm);
            }
            let ell = ell_index(target, k_new, m, d)?;
            new_block.push(ConnectionColumn::from_ranged(
                target, k_new, ell, zb.parity, zb.jmin, zb.jmax, &v,
            ));
        }
        c.push_block(new_block);
        finish_block_tables(ops, &c, &mut tables)?;
    }
    Ok(c)
}

fn finish_block_tables(ops: &MultOps, c: &ConnectionMatrix, tables: &mut Tables) -> Result<()> {
    let n = c.n_max();
    let block = c.block(n);
    tables.a_x.push(sandwich(ops, false, block, block)?);
    tables.a_y.push(sandwich(ops, true, block, block)?);
    if n >= 1 {
        let prev = c.block(n - 1);
        tables.b_x.push(sandwich(ops, false, prev, block)?);
        tables.b_y.push(sandwich(ops, true, prev, block)?);
    }
    Ok(())
}

/// Sum of the recursion's projection terms at flat row `j` for the column
/// `(target, k_new)` built from source column `(target - 1, src_k)`.
#[allow(clippy::too_many_arguments)]
fn projections(
    m: u8,
    d: usize,
    target: usize,
    k_new: usize,
    by_y: bool,
    src_k: usize,
    j: usize,
    c: &ConnectionMatrix,
    tables: &Tables,
    new_block: &[ConnectionColumn],
    b_new: &[f64],
) -> f64 {
    let n = target - 1;
    let (a, b) = if by_y {
        (&tables.a_y, &tables.b_y)
    } else {
        (&tables.a_x, &tables.b_x)
    };
    // parity class the recursion writes into; projections only touch
    // columns of the same class
    let out_part = zero_bounds(m, d, target, k_new).parity;
    let same_class = |block: usize, r: usize| -> bool {
        m == 1 || zero_bounds(m, d, block, r).parity == out_part
    };
    let mut acc = 0.0;

    // previous-block sum ranges per case
    let prev_range: Vec<usize> = if target <= d.max(m as usize) - 1 {
        if by_y {
            // growth column: owners below the source index cannot couple
            (src_k.max(2) - 1..=n).collect()
        } else {
            (src_k..=n).collect()
        }
    } else if target == d {
        (src_k.max(2) - 1..=d - 1).collect()
    } else {
        (src_k..=d).collect()
    };
    if n >= 1 {
        let bn = &b[n - 1];
        for &r in &prev_range {
            if r > c.block(n - 1).len() || !same_class(n - 1, r) {
                continue;
            }
            acc += bn[(src_k - 1, r - 1)] * c.block(n - 1)[r - 1].get(j);
        }
    }

    let an = &a[n];
    for r in 1..=c.block(n).len() {
        if !same_class(n, r) {
            continue;
        }
        acc += an[(r - 1, src_k - 1)] * c.block(n)[r - 1].get(j);
    }

    for (idx, col) in new_block.iter().enumerate() {
        let r = idx + 1;
        if r >= k_new {
            break;
        }
        if !same_class(target, r) {
            continue;
        }
        acc += b_new[idx] * col.get(j);
    }
    acc
}
