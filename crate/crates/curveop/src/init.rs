//! Closed forms for the first connection-matrix blocks and the first Jacobi
//! entries. The engine regenerates these through its ordinary extension
//! steps; the closed forms pin down the bootstrap and are cross-checked in
//! tests.

use crate::banded::RangedVec;
use crate::bounds::zero_bounds;
use crate::curve::{ell_index, flat_row, RowPart};
use crate::error::{Error, Result};
use crate::lanczos::ConnectionColumn;
use crate::multops::MultOps;
use nalgebra::DMatrix;

/// Initial blocks and the Jacobi entries they determine.
#[derive(Debug, Clone)]
pub struct InitColumns {
    pub blocks: Vec<Vec<ConnectionColumn>>,
    pub a_x: Vec<DMatrix<f64>>,
    pub a_y: Vec<DMatrix<f64>>,
    pub b_x: Vec<DMatrix<f64>>,
    pub b_y: Vec<DMatrix<f64>>,
}

fn column_from_entries(
    m: u8,
    d: usize,
    target: usize,
    k: usize,
    entries: &[(usize, f64)],
) -> Result<ConnectionColumn> {
    let zb = zero_bounds(m, d, target, k);
    let mut v = RangedVec::zeros(zb.jmin, zb.jmax);
    for &(row, val) in entries {
        v.set(row, val);
    }
    let ell = ell_index(target, k, m, d)?;
    Ok(ConnectionColumn::from_ranged(
        target, k, ell, zb.parity, zb.jmin, zb.jmax, &v,
    ))
}

/// First columns of the connection matrix: degree 0 and 1 for m = 1
/// (degree at least 2), degrees 0..2 for m = 2 (degree at least 3).
///
/// Only curves whose block structure admits these closed forms are accepted;
/// smaller degrees bootstrap through the explicit bases instead.
pub fn init_columns(ops: &MultOps) -> Result<InitColumns> {
    let curve = ops.curve();
    let m = curve.m;
    let d = curve.degree();
    match m {
        1 => {
            if d < 2 {
                return Err(Error::SectionTooSmall(
                    "closed-form initial columns need degree >= 2 for m = 1".into(),
                ));
            }
            let part = None;
            let e0 = ConnectionColumn::unit(0, 1, 0, part, 0);
            let e1 = column_from_entries(1, d, 1, 1, &[(1, 1.0)])?;
            // second column of block 1: the tail of y P_{0,0} beyond degree 1
            let tail: Vec<(usize, f64)> = (2..=d).map(|r| (r, ops.y.get(r, 0))).collect();
            let norm2: f64 = tail.iter().map(|(_, v)| v * v).sum();
            let b21 = norm2.sqrt();
            if b21 < 1e-13 {
                return Err(Error::Degenerate {
                    n: 1,
                    k: 2,
                    value: b21,
                });
            }
            let scaled: Vec<(usize, f64)> = tail.iter().map(|&(r, v)| (r, v / b21)).collect();
            let c2 = column_from_entries(1, d, 1, 2, &scaled)?;

            let a_x = vec![DMatrix::from_element(1, 1, ops.x.get(0, 0))];
            let b_x = vec![DMatrix::from_column_slice(2, 1, &[ops.x.get(1, 0), 0.0])];
            let a_y = vec![DMatrix::from_element(1, 1, ops.y.get(0, 0))];
            let b_y = vec![DMatrix::from_column_slice(2, 1, &[ops.y.get(1, 0), b21])];
            Ok(InitColumns {
                blocks: vec![vec![e0], vec![e1, c2]],
                a_x,
                a_y,
                b_x,
                b_y,
            })
        }
        2 => {
            if d < 3 {
                return Err(Error::SectionTooSmall(
                    "closed-form initial columns need degree >= 3 for m = 2".into(),
                ));
            }
            let raising = ops.raising.as_ref().expect("m = 2 carries raising entries");
            let e0 = ConnectionColumn::unit(0, 1, 0, Some(RowPart::Base), 0);
            let e1 = column_from_entries(2, d, 1, 1, &[(1, 1.0)])?;
            let e2 = column_from_entries(2, d, 1, 2, &[(2, 1.0)])?;
            let e3 = column_from_entries(2, d, 2, 1, &[(3, 1.0)])?;
            let e4 = column_from_entries(2, d, 2, 2, &[(4, 1.0)])?;
            // third column of block 2: the tail of y P_{1,1} beyond degree 2
            let tail: Vec<(usize, f64)> = (3..=d)
                .map(|j| (flat_row(2, j, RowPart::Base), raising.r(0, j)))
                .collect();
            let norm2: f64 = tail.iter().map(|(_, v)| v * v).sum();
            let b32 = norm2.sqrt();
            if b32 < 1e-13 {
                return Err(Error::Degenerate {
                    n: 2,
                    k: 3,
                    value: b32,
                });
            }
            let scaled: Vec<(usize, f64)> = tail.iter().map(|&(r, v)| (r, v / b32)).collect();
            let c5 = column_from_entries(2, d, 2, 3, &scaled)?;

            let jw = &ops.jw;
            let jp = ops.jphiw.as_ref().unwrap();
            let a_x = vec![
                DMatrix::from_element(1, 1, jw.alpha(0)),
                DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                    jw.alpha(1),
                    jp.alpha(0),
                ])),
            ];
            let b_x = vec![
                DMatrix::from_column_slice(2, 1, &[jw.beta(0), 0.0]),
                DMatrix::from_row_slice(3, 2, &[jw.beta(1), 0.0, 0.0, jp.beta(0), 0.0, 0.0]),
            ];
            let a_y = vec![
                DMatrix::from_element(1, 1, 0.0),
                DMatrix::from_row_slice(2, 2, &[0.0, raising.r(0, 1), raising.r(0, 1), 0.0]),
            ];
            let b_y = vec![
                DMatrix::from_column_slice(2, 1, &[0.0, raising.r(0, 0)]),
                DMatrix::from_row_slice(
                    3,
                    2,
                    &[0.0, raising.r(0, 2), raising.r(1, 1), 0.0, 0.0, b32],
                ),
            ];
            Ok(InitColumns {
                blocks: vec![vec![e0], vec![e1, e2], vec![e3, e4, c5]],
                a_x,
                a_y,
                b_x,
                b_y,
            })
        }
        _ => unreachable!(),
    }
}
