//! Rectangular dense blocks arranged on a block grid, with lossless
//! conversion to a flat banded matrix.

use crate::banded::BandedMatrix;
use nalgebra::DMatrix;
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct BlockMatrix {
    row_sizes: Vec<usize>,
    col_sizes: Vec<usize>,
    row_offsets: Vec<usize>,
    col_offsets: Vec<usize>,
    blocks: BTreeMap<(usize, usize), DMatrix<f64>>,
}

impl BlockMatrix {
    pub fn new(row_sizes: Vec<usize>, col_sizes: Vec<usize>) -> Self {
        let offsets = |sizes: &[usize]| {
            let mut off = Vec::with_capacity(sizes.len() + 1);
            let mut acc = 0;
            off.push(0);
            for &s in sizes {
                acc += s;
                off.push(acc);
            }
            off
        };
        let row_offsets = offsets(&row_sizes);
        let col_offsets = offsets(&col_sizes);
        BlockMatrix {
            row_sizes,
            col_sizes,
            row_offsets,
            col_offsets,
            blocks: BTreeMap::new(),
        }
    }

    pub fn nrows(&self) -> usize {
        *self.row_offsets.last().unwrap()
    }

    pub fn ncols(&self) -> usize {
        *self.col_offsets.last().unwrap()
    }

    /// Inserts a block; its dimensions must tile consistently with the grid.
    pub fn set_block(&mut self, bi: usize, bj: usize, block: DMatrix<f64>) {
        assert_eq!(block.nrows(), self.row_sizes[bi], "block row size mismatch");
        assert_eq!(block.ncols(), self.col_sizes[bj], "block col size mismatch");
        self.blocks.insert((bi, bj), block);
    }

    pub fn block(&self, bi: usize, bj: usize) -> Option<&DMatrix<f64>> {
        self.blocks.get(&(bi, bj))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let bi = self.row_offsets.partition_point(|&o| o <= i) - 1;
        let bj = self.col_offsets.partition_point(|&o| o <= j) - 1;
        match self.blocks.get(&(bi, bj)) {
            Some(b) => b[(i - self.row_offsets[bi], j - self.col_offsets[bj])],
            None => 0.0,
        }
    }

    /// Flattens into a banded matrix whose bandwidths cover every stored
    /// block; the conversion is entrywise lossless.
    pub fn to_banded(&self) -> BandedMatrix {
        let mut lower = 0usize;
        let mut upper = 0usize;
        for (&(bi, bj), block) in &self.blocks {
            let r0 = self.row_offsets[bi];
            let c0 = self.col_offsets[bj];
            let r1 = r0 + block.nrows() - 1;
            let c1 = c0 + block.ncols() - 1;
            lower = lower.max(r1.saturating_sub(c0));
            upper = upper.max(c1.saturating_sub(r0));
        }
        let mut out = BandedMatrix::zeros(self.nrows(), self.ncols(), lower, upper);
        for (&(bi, bj), block) in &self.blocks {
            let r0 = self.row_offsets[bi];
            let c0 = self.col_offsets[bj];
            for i in 0..block.nrows() {
                for j in 0..block.ncols() {
                    out.set(r0 + i, c0 + j, block[(i, j)]);
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.nrows(), self.ncols());
        for (&(bi, bj), block) in &self.blocks {
            let r0 = self.row_offsets[bi];
            let c0 = self.col_offsets[bj];
            for i in 0..block.nrows() {
                for j in 0..block.ncols() {
                    out[(r0 + i, c0 + j)] = block[(i, j)];
                }
            }
        }
        out
    }
}
