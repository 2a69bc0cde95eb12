//! Block-sparse operators on `Fock ⊗ ℂ^q → Fock ⊗ ℂ^p`.
//!
//! Rows and columns are Fock basis indices; each stored block is a dense
//! `p × q` matrix. Multi-analytic operators and Cauchy kernels only touch
//! blocks `(γσ, γ)`, so a row holds at most `|γσ| + 1` blocks and products
//! stay cheap long after the dense form would not.

use std::collections::BTreeMap;

use crate::fock::Monomial;
use crate::linalg::{CMat, C64};
use crate::par;

#[derive(Clone, Debug)]
pub struct BlockOp {
    cols: usize,
    p: usize,
    q: usize,
    rows: Vec<BTreeMap<usize, CMat>>,
}

impl BlockOp {
    pub fn zeros(rows: usize, cols: usize, p: usize, q: usize) -> Self {
        BlockOp { cols, p, q, rows: vec![BTreeMap::new(); rows] }
    }

    /// `I_dim ⊗ M`.
    pub fn diag(dim: usize, m: &CMat) -> Self {
        let mut out = BlockOp::zeros(dim, dim, m.nrows(), m.ncols());
        for r in 0..dim {
            out.rows[r].insert(r, m.clone());
        }
        out
    }

    pub fn identity(dim: usize, d: usize) -> Self {
        BlockOp::diag(dim, &CMat::identity(d, d))
    }

    /// `M ⊗ I_d`.
    pub fn from_monomial(m: &Monomial, d: usize) -> Self {
        let mut out = BlockOp::zeros(m.dim(), m.dim(), d, d);
        let id = CMat::identity(d, d);
        for (r, c, w) in m.entries() {
            out.add_block(r, c, &id.scale(w));
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn block_shape(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn nnz_blocks(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    pub fn block(&self, r: usize, c: usize) -> Option<&CMat> {
        self.rows[r].get(&c)
    }

    pub fn row(&self, r: usize) -> &BTreeMap<usize, CMat> {
        &self.rows[r]
    }

    pub fn add_block(&mut self, r: usize, c: usize, blk: &CMat) {
        assert_eq!(blk.shape(), (self.p, self.q), "block shape");
        assert!(c < self.cols);
        match self.rows[r].get_mut(&c) {
            Some(existing) => *existing += blk,
            None => {
                self.rows[r].insert(c, blk.clone());
            }
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for row in &mut out.rows {
            for blk in row.values_mut() {
                *blk *= s;
            }
        }
        out
    }

    pub fn add(&self, other: &BlockOp) -> Self {
        assert_eq!((self.nrows(), self.cols, self.p, self.q), (other.nrows(), other.cols, other.p, other.q));
        let mut out = self.clone();
        for (r, row) in other.rows.iter().enumerate() {
            for (&c, blk) in row {
                out.add_block(r, c, blk);
            }
        }
        out
    }

    pub fn sub(&self, other: &BlockOp) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &BlockOp) -> Self {
        assert_eq!(self.cols, other.nrows(), "inner Fock dimension");
        assert_eq!(self.q, other.p, "inner block dimension");
        let rows = par::map_range(self.nrows(), |r| {
            let mut acc: BTreeMap<usize, CMat> = BTreeMap::new();
            for (&k, a) in &self.rows[r] {
                for (&c, b) in &other.rows[k] {
                    let prod = a * b;
                    match acc.get_mut(&c) {
                        Some(x) => *x += prod,
                        None => {
                            acc.insert(c, prod);
                        }
                    }
                }
            }
            acc
        });
        BlockOp { cols: other.cols, p: self.p, q: other.q, rows }
    }

    pub fn adjoint(&self) -> Self {
        let mut out = BlockOp::zeros(self.cols, self.nrows(), self.q, self.p);
        for (r, row) in self.rows.iter().enumerate() {
            for (&c, blk) in row {
                out.rows[c].insert(r, blk.adjoint());
            }
        }
        out
    }

    /// Right-multiplies every block by `m` (`self · (I ⊗ m)`).
    pub fn mul_right_blocks(&self, m: &CMat) -> Self {
        assert_eq!(self.q, m.nrows());
        let rows = par::map_slice(&self.rows, |row| row.iter().map(|(&c, b)| (c, b * m)).collect());
        BlockOp { cols: self.cols, p: self.p, q: m.ncols(), rows }
    }

    /// Left-multiplies every block by `m` (`(I ⊗ m) · self`).
    pub fn mul_left_blocks(&self, m: &CMat) -> Self {
        assert_eq!(self.p, m.ncols());
        let rows = par::map_slice(&self.rows, |row| row.iter().map(|(&c, b)| (c, m * b)).collect());
        BlockOp { cols: self.cols, p: m.nrows(), q: self.q, rows }
    }

    pub fn to_dense(&self) -> CMat {
        let mut out = CMat::zeros(self.nrows() * self.p, self.cols * self.q);
        for (r, row) in self.rows.iter().enumerate() {
            for (&c, blk) in row {
                out.view_mut((r * self.p, c * self.q), (self.p, self.q)).copy_from(blk);
            }
        }
        out
    }

    /// `self · x` for a dense `x` with `cols·q` rows.
    pub fn mul_dense(&self, x: &CMat) -> CMat {
        assert_eq!(x.nrows(), self.cols * self.q);
        let parts = par::map_range(self.nrows(), |r| {
            let mut acc = CMat::zeros(self.p, x.ncols());
            for (&c, blk) in &self.rows[r] {
                acc += blk * x.rows(c * self.q, self.q);
            }
            acc
        });
        let mut out = CMat::zeros(self.nrows() * self.p, x.ncols());
        for (r, part) in parts.into_iter().enumerate() {
            out.rows_mut(r * self.p, self.p).copy_from(&part);
        }
        out
    }

    /// Keeps only rows and columns with index `< k`.
    pub fn leading(&self, k: usize) -> Self {
        let rows = self.rows[..k.min(self.nrows())]
            .iter()
            .map(|row| row.range(..k).map(|(&c, b)| (c, b.clone())).collect())
            .collect();
        BlockOp { cols: k.min(self.cols), p: self.p, q: self.q, rows }
    }
}
