//! Explicit OP bases for low-degree curves: the connection matrix is the
//! identity (or a fixed permutation for even quartics with even weight), so
//! no Lanczos run is needed.

use crate::curve::{dim_vn, ell_index, flat_row, CurveSpec, RowPart};
use crate::error::Result;
use crate::jacobi::{assemble_jacobi, BlockJacobiPair};
use crate::lanczos::{ConnectionColumn, ConnectionMatrix};
use crate::multops::MultOps;

/// Flat row assignments of the explicit basis, or `None` when the curve has
/// no explicit arrangement: `m = 1` needs degree at most 2, `m = 2` degree
/// at most 3, or an even quartic over an even weight.
fn assignment(curve: &CurveSpec, n: usize, k: usize) -> Option<(usize, RowPart)> {
    use RowPart::{Base, Lifted};
    let d = curve.degree();
    match (curve.m, d) {
        (1, 1) => Some((n, Base)),
        (1, 2) => Some(match (n, k) {
            (0, 1) => (0, Base),
            (n, 1) => (2 * n - 1, Base),
            (n, _) => (2 * n, Base),
        }),
        (2, 1) | (2, 2) => Some(match (n, k) {
            (0, 1) => (0, Base),
            (n, 1) => (flat_row(2, n, Base), Base),
            (n, _) => (flat_row(2, n, Lifted), Lifted),
        }),
        (2, 3) => Some(match (n, k) {
            (0, 1) => (0, Base),
            (1, 1) => (flat_row(2, 1, Base), Base),
            (1, 2) => (flat_row(2, 1, Lifted), Lifted),
            (n, k) if n % 2 == 0 => {
                let r = n / 2;
                match k {
                    1 => (flat_row(2, 3 * r - 1, Base), Base),
                    2 => (flat_row(2, 3 * r - 1, Lifted), Lifted),
                    _ => (flat_row(2, 3 * r, Base), Base),
                }
            }
            (n, k) => {
                let r = (n - 1) / 2;
                match k {
                    1 => (flat_row(2, 3 * r, Lifted), Lifted),
                    2 => (flat_row(2, 3 * r + 1, Base), Base),
                    _ => (flat_row(2, 3 * r + 1, Lifted), Lifted),
                }
            }
        }),
        (2, 4) if curve.is_even() => Some(match (n, k) {
            (0, 1) => (0, Base),
            (1, 1) => (flat_row(2, 1, Base), Base),
            (1, 2) => (flat_row(2, 1, Lifted), Lifted),
            (2, 1) => (flat_row(2, 2, Base), Base),
            (2, 2) => (flat_row(2, 2, Lifted), Lifted),
            (2, 3) => (flat_row(2, 4, Base), Base),
            (n, k) if n % 2 == 1 => {
                let r = (n - 1) / 2;
                match k {
                    1 => (flat_row(2, 4 * r - 1, Base), Base),
                    2 => (flat_row(2, 4 * r - 1, Lifted), Lifted),
                    3 => (flat_row(2, 4 * r + 1, Base), Base),
                    _ => (flat_row(2, 4 * r + 1, Lifted), Lifted),
                }
            }
            (n, k) => {
                let r = (n - 2) / 2;
                match k {
                    1 => (flat_row(2, 4 * r, Lifted), Lifted),
                    2 => (flat_row(2, 4 * r + 2, Base), Base),
                    3 => (flat_row(2, 4 * r + 2, Lifted), Lifted),
                    _ => (flat_row(2, 4 * r + 4, Base), Base),
                }
            }
        }),
        _ => None,
    }
}

/// Whether the curve admits an explicit basis.
pub fn has_explicit_basis(curve: &CurveSpec) -> bool {
    let d = curve.degree();
    match curve.m {
        1 => d <= 2,
        2 => d <= 3 || (d == 4 && curve.is_even()),
        _ => false,
    }
}

/// The explicit basis as a connection matrix of unit columns, with its
/// Jacobi pair; `None` when the curve requires the Lanczos engine.
pub fn explicit_basis(
    ops: &MultOps,
    n_max: usize,
) -> Result<Option<(ConnectionMatrix, BlockJacobiPair)>> {
    let curve = ops.curve();
    if !has_explicit_basis(curve) {
        return Ok(None);
    }
    let d = curve.degree();
    let mut c = ConnectionMatrix::new(curve.m, d);
    c.source = crate::lanczos::BasisSource::Explicit;
    for n in 0..=n_max {
        let mut block = Vec::with_capacity(dim_vn(n, curve.m, d));
        for k in 1..=dim_vn(n, curve.m, d) {
            let (row, part) = assignment(curve, n, k).expect("case checked above");
            let part = if curve.m == 2 { Some(part) } else { None };
            let ell = ell_index(n, k, curve.m, d)?;
            block.push(ConnectionColumn::unit(n, k, ell, part, row));
        }
        c.push_block(block);
    }
    let pair = assemble_jacobi(&c, ops)?;
    Ok(Some((c, pair)))
}
