//! Dense complex linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[cfg(test)]
pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Hermitian part `(A + A*)/2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// Eigenvalues of the Hermitian part of `a`, ascending.
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = hermitian_part(a).symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

pub fn min_eigenvalue(a: &CMat) -> f64 {
    hermitian_eigenvalues(a).first().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(a: &CMat) -> f64 {
    hermitian_eigenvalues(a).last().copied().unwrap_or(0.0)
}

/// Square root of the PSD part of a Hermitian matrix; negative eigenvalues are clipped.
pub fn psd_sqrt(a: &CMat) -> CMat {
    let n = a.nrows();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let eig = hermitian_part(a).symmetric_eigen();
    let mut out = CMat::zeros(n, n);
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        if s == 0.0 {
            continue;
        }
        let col = eig.eigenvectors.column(j);
        out += (col * col.adjoint()).scale(s);
    }
    out
}

/// Orthogonal projection onto the numerical range of a PSD matrix and its rank.
///
/// Eigenvalues at or below `rel_cut * max_eigenvalue` count as zero.
pub fn range_projection(a: &CMat, rel_cut: f64) -> (CMat, usize) {
    let n = a.nrows();
    if n == 0 {
        return (CMat::zeros(0, 0), 0);
    }
    let eig = hermitian_part(a).symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
    let mut proj = CMat::zeros(n, n);
    let mut rank = 0;
    if top == 0.0 {
        return (proj, 0);
    }
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > rel_cut * top {
            let col = eig.eigenvectors.column(j);
            proj += col * col.adjoint();
            rank += 1;
        }
    }
    (proj, rank)
}

/// Numerical rank of a PSD matrix with the same cut as [`range_projection`].
pub fn psd_rank(a: &CMat, rel_cut: f64) -> usize {
    let ev = hermitian_eigenvalues(a);
    let top = ev.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
    if top == 0.0 {
        return 0;
    }
    ev.iter().filter(|&&x| x > rel_cut * top).count()
}

/// Largest singular value.
pub fn spectral_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.iter().fold(0.0_f64, |m, &x| m.max(x))
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

pub fn trace_re(a: &CMat) -> f64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)].re).sum()
}

/// `A ⊗ I_d` with the word-major index convention `(word, j) -> word * d + j`.
pub fn kron_identity(a: &CMat, d: usize) -> CMat {
    let mut out = CMat::zeros(a.nrows() * d, a.ncols() * d);
    for c in 0..a.ncols() {
        for r in 0..a.nrows() {
            let v = a[(r, c)];
            if v != ZERO {
                for j in 0..d {
                    out[(r * d + j, c * d + j)] = v;
                }
            }
        }
    }
    out
}

/// `I_k ⊗ B` (block diagonal with `k` copies of `B`).
pub fn identity_kron(k: usize, b: &CMat) -> CMat {
    let (p, q) = b.shape();
    let mut out = CMat::zeros(k * p, k * q);
    for blk in 0..k {
        out.view_mut((blk * p, blk * q), (p, q)).copy_from(b);
    }
    out
}

/// Compressed-row sparse complex matrix, used where tuples are mostly zeros.
#[derive(Clone, Debug)]
pub struct SparseMat {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseMat {
    pub fn from_dense(a: &CMat) -> Self {
        let mut row_ptr = Vec::with_capacity(a.nrows() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for r in 0..a.nrows() {
            for col in 0..a.ncols() {
                let v = a[(r, col)];
                if v != ZERO {
                    cols.push(col);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseMat { nrows: a.nrows(), ncols: a.ncols(), row_ptr, cols, vals }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `S X` for dense `X`.
    pub fn mul_dense(&self, x: &CMat) -> CMat {
        assert_eq!(self.ncols, x.nrows());
        let mut out = CMat::zeros(self.nrows, x.ncols());
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let (col, v) = (self.cols[k], self.vals[k]);
                for j in 0..x.ncols() {
                    out[(r, j)] += v * x[(col, j)];
                }
            }
        }
        out
    }

    /// `S X S*`.
    pub fn sandwich(&self, x: &CMat) -> CMat {
        let sx = self.mul_dense(x);
        self.mul_dense(&sx.adjoint()).adjoint()
    }
}
