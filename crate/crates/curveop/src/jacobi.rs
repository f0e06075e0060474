//! Block-tridiagonal Jacobi pair of the computed OP basis, assembled from the
//! connection matrix by sandwich products with the multiplication operators.

use crate::block::BlockMatrix;
use crate::error::{Error, Result};
use crate::lanczos::{extension_plan, ConnectionMatrix, Step};
use crate::multops::MultOps;
use nalgebra::DMatrix;

/// Diagonal blocks `A_n` (square, symmetric) and sub-diagonal blocks `B_n`
/// of the two commuting block-tridiagonal Jacobi matrices.
#[derive(Debug, Clone)]
pub struct BlockJacobiPair {
    pub a_x: Vec<DMatrix<f64>>,
    pub a_y: Vec<DMatrix<f64>>,
    pub b_x: Vec<DMatrix<f64>>,
    pub b_y: Vec<DMatrix<f64>>,
    /// Largest asymmetry seen in any `A` block before averaging.
    pub max_asymmetry: f64,
}

impl BlockJacobiPair {
    pub fn n_max(&self) -> usize {
        self.a_x.len() - 1
    }

    /// The flat block-tridiagonal matrix for one operator.
    pub fn to_block_matrix(&self, by_y: bool) -> BlockMatrix {
        let (a, b) = if by_y {
            (&self.a_y, &self.b_y)
        } else {
            (&self.a_x, &self.b_x)
        };
        let sizes: Vec<usize> = a.iter().map(|m| m.nrows()).collect();
        let mut out = BlockMatrix::new(sizes.clone(), sizes);
        for (n, an) in a.iter().enumerate() {
            out.set_block(n, n, an.clone());
        }
        for (n, bn) in b.iter().enumerate() {
            out.set_block(n + 1, n, bn.clone());
            out.set_block(n, n + 1, bn.transpose());
        }
        out
    }

    /// Normalization entries: for every column of every extension step, the
    /// `B` entry that carried the Gram-Schmidt normalizer.
    pub fn normalizer_entries(&self, m: u8, d: usize, x_then_y: bool) -> Vec<f64> {
        let mut out = Vec::new();
        for target in 1..=self.n_max() {
            let plan = extension_plan(m, d, target, x_then_y);
            for (pos, step) in plan.iter().enumerate() {
                let (by_y, src_k) = match *step {
                    Step::ByX(k) => (false, k),
                    Step::ByY(k) => (true, k),
                };
                let b = if by_y {
                    &self.b_y[target - 1]
                } else {
                    &self.b_x[target - 1]
                };
                out.push(b[(pos, src_k - 1)]);
            }
        }
        out
    }

    /// Max entry of `J_x J_y - J_y J_x` over finite sections trimmed by one
    /// block at the truncation edge.
    pub fn commutator_max(&self) -> f64 {
        if self.n_max() < 1 {
            return 0.0;
        }
        let jx = self.to_block_matrix(false).to_dense();
        let jy = self.to_block_matrix(true).to_dense();
        let comm = &jx * &jy - &jy * &jx;
        let trim = self.a_x.last().map(|a| a.nrows()).unwrap_or(0);
        let keep = comm.nrows().saturating_sub(trim);
        let mut worst: f64 = 0.0;
        for i in 0..keep {
            for j in 0..keep {
                worst = worst.max(comm[(i, j)].abs());
            }
        }
        worst
    }
}

/// `A_n = C_n^T M C_n` and `B_n = C_{n+1}^T M C_n` for both operators, with
/// `A` blocks symmetrized by averaging after asserting the asymmetry is
/// below `1e-11`.
pub fn assemble_jacobi(c: &ConnectionMatrix, ops: &MultOps) -> Result<BlockJacobiPair> {
    let n_max = c.n_max();
    let mut pair = BlockJacobiPair {
        a_x: Vec::with_capacity(n_max + 1),
        a_y: Vec::with_capacity(n_max + 1),
        b_x: Vec::with_capacity(n_max),
        b_y: Vec::with_capacity(n_max),
        max_asymmetry: 0.0,
    };
    for by_y in [false, true] {
        for n in 0..=n_max {
            let block = c.block(n);
            let dim = block.len();
            let mvs: Vec<_> = block
                .iter()
                .map(|col| ops.op(by_y).matvec_ranged(&col.to_ranged()))
                .collect::<Result<_>>()?;
            let mut a = DMatrix::zeros(dim, dim);
            for (k, mv) in mvs.iter().enumerate() {
                for (r, col) in block.iter().enumerate() {
                    a[(r, k)] = col.dot_ranged(mv);
                }
            }
            let mut asym: f64 = 0.0;
            for r in 0..dim {
                for k in (r + 1)..dim {
                    asym = asym.max((a[(r, k)] - a[(k, r)]).abs());
                }
            }
            if asym > 1e-11 {
                return Err(Error::NumericalCheck(format!(
                    "A block {} asymmetry {:.3e} exceeds 1e-11",
                    n, asym
                )));
            }
            pair.max_asymmetry = pair.max_asymmetry.max(asym);
            let sym = 0.5 * (&a + a.transpose());
            if n + 1 <= n_max {
                let next = c.block(n + 1);
                let mut b = DMatrix::zeros(next.len(), dim);
                for (k, mv) in mvs.iter().enumerate() {
                    for (r, col) in next.iter().enumerate() {
                        b[(r, k)] = col.dot_ranged(mv);
                    }
                }
                if by_y {
                    pair.b_y.push(b);
                } else {
                    pair.b_x.push(b);
                }
            }
            if by_y {
                pair.a_y.push(sym);
            } else {
                pair.a_x.push(sym);
            }
        }
    }
    Ok(pair)
}

/// Max residual of the three-term block recurrences
/// `M C_n = C_{n-1} B_{n-1}^T + C_n A_n + C_{n+1} B_n` over all computed
/// interior blocks, for the given operator.
pub fn recurrence_residual(
    c: &ConnectionMatrix,
    pair: &BlockJacobiPair,
    ops: &MultOps,
    by_y: bool,
) -> Result<f64> {
    let n_max = c.n_max();
    let (a, b) = if by_y {
        (&pair.a_y, &pair.b_y)
    } else {
        (&pair.a_x, &pair.b_x)
    };
    let mut worst: f64 = 0.0;
    for n in 0..n_max {
        let block = c.block(n);
        for (k, col) in block.iter().enumerate() {
            let v = ops.op(by_y).matvec_ranged(&col.to_ranged())?;
            let mut lo = v.lo();
            let mut hi = v.hi();
            let mut parts: Vec<(&crate::lanczos::ConnectionColumn, f64)> = Vec::new();
            if n >= 1 {
                for (r, prev) in c.block(n - 1).iter().enumerate() {
                    parts.push((prev, b[n - 1][(k, r)]));
                }
            }
            for (r, cur) in block.iter().enumerate() {
                parts.push((cur, a[n][(r, k)]));
            }
            for (r, next) in c.block(n + 1).iter().enumerate() {
                parts.push((next, b[n][(r, k)]));
            }
            for (col, _) in &parts {
                lo = lo.min(col.jmin);
                hi = hi.max(col.jmax);
            }
            let mut v = v.expand(lo, hi);
            for (col, coef) in parts {
                v.axpy_clipped(-coef, &col.to_ranged());
            }
            let res = v.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
            worst = worst.max(res);
        }
    }
    Ok(worst)
}
