//! Poisson kernels of domain tuples and the Beurling-type factorization.
//!
//! Kernels are kept in full coordinates: the block at `α` is
//! `sqrt(b_α) Δ T_α*` with `Δ = (I − Φ(I))^{1/2}` as a `d × d` matrix, and
//! the defect rank is reported alongside.
//!
//! Tails are computed from level sums `S_j = Σ_{|α|=j} b_α T_α Δ² T_α*`,
//! which satisfy `S_j = Σ_β a_β T_β S_{j−|β|} T_β*`.

use std::collections::VecDeque;

use serde::Serialize;

use crate::fock::{Side, TruncatedFock};
use crate::linalg::{self, CMat, C64};
use crate::par;
use crate::symbol::FreeSymbol;
use crate::tuples::{membership, OperatorTuple, PhiMap};
use crate::words::Word;
use crate::{Error, Result};

pub const RANK_CUT: f64 = 1e-12;
const TAIL_MAX_STEPS: usize = 20_000;

/// `T_α` for every basis word, in graded order.
pub fn word_products(t: &OperatorTuple, fock: &TruncatedFock) -> Vec<CMat> {
    let n = fock.n();
    let mut out: Vec<CMat> = Vec::with_capacity(fock.dim());
    out.push(CMat::identity(t.d(), t.d()));
    for level in 1..=fock.level() {
        let lo = fock.dim_upto(level - 1);
        let hi = fock.dim_upto(level);
        let prev = &out;
        let fresh = par::map_range(hi - lo, |off| {
            let w = &fock.basis()[lo + off];
            let rest = Word::new(w.letters()[1..].to_vec());
            t.mat(w.letters()[0]) * &prev[rest.graded_index(n)]
        });
        out.extend(fresh);
    }
    out
}

#[derive(Clone, Debug)]
pub struct PoissonKernel {
    /// `(dim·d) × d`, block `α` equal to `sqrt(b_α) Δ T_α*`.
    pub k: CMat,
    pub delta: CMat,
    pub defect_rank: usize,
    pub d: usize,
    pub level: usize,
    /// `tails[k] = Σ_{j>k} S_j`, `k = 0..=m`.
    pub tails: Vec<CMat>,
    pub tail_converged: bool,
}

impl PoissonKernel {
    /// `‖Σ_{j>m} S_j‖`, the part of `K*K` lost to truncation.
    pub fn tail_bound(&self) -> f64 {
        linalg::max_eigenvalue(&self.tails[self.level]).max(0.0)
    }

    /// Rows of degree `≤ deg`.
    pub fn rows_upto(&self, fock: &TruncatedFock, deg: usize) -> usize {
        fock.dim_upto(deg) * self.d
    }
}

pub fn build_poisson(f: &FreeSymbol, t: &OperatorTuple, fock: &TruncatedFock) -> Result<PoissonKernel> {
    if fock.symbol() != f {
        return Err(Error::input("fock", "model was built for a different symbol"));
    }
    let mem = membership(f, t)?;
    if !mem.member {
        return Err(Error::Precondition(format!(
            "Δ² has eigenvalue {:e} below −{:e}; tuple is not in the domain",
            mem.defect_min_eig, mem.tolerance
        )));
    }
    let d = t.d();
    let phi = PhiMap::new(f, t)?;
    let id = CMat::identity(d, d);
    let delta_sq = linalg::hermitian_part(&(&id - phi.apply(&id)));
    let delta = linalg::psd_sqrt(&delta_sq);
    let defect_rank = linalg::psd_rank(&delta, RANK_CUT);

    let prods = word_products(t, fock);
    let blocks = par::map_range(fock.dim(), |idx| (&delta * prods[idx].adjoint()).scale(fock.b().by_index(idx).sqrt()));
    let mut k = CMat::zeros(fock.dim() * d, d);
    for (idx, blk) in blocks.into_iter().enumerate() {
        k.rows_mut(idx * d, d).copy_from(&blk);
    }

    let (tails, tail_converged) = level_tails(f, t, &delta_sq, fock.level());
    Ok(PoissonKernel { k, delta, defect_rank, d, level: fock.level(), tails, tail_converged })
}

/// `tails[k] = Σ_{j>k} S_j(X)` for `k = 0..=m`, with the sum past `m` run to convergence.
pub fn level_tails(f: &FreeSymbol, t: &OperatorTuple, x: &CMat, m: usize) -> (Vec<CMat>, bool) {
    let d = t.d();
    let deg = f.support_degree();
    let terms: Vec<(usize, f64, CMat)> = f.support().map(|(w, a)| (w.len(), a, t.word(w))).collect();
    // window holds S_{j-deg}, …, S_{j-1}; missing negative indices count as zero
    let mut window: VecDeque<CMat> = VecDeque::with_capacity(deg);
    let mut head: Vec<CMat> = Vec::with_capacity(m + 1);
    let mut beyond = CMat::zeros(d, d);
    let mut converged = false;
    let mut quiet = 0;
    let mut j = 0;
    loop {
        let s = if j == 0 {
            x.clone()
        } else {
            let mut acc = CMat::zeros(d, d);
            for (len, a, tb) in &terms {
                if *len <= window.len() {
                    acc += (tb * &window[window.len() - len] * tb.adjoint()).scale(*a);
                }
            }
            acc
        };
        if j <= m {
            head.push(s.clone());
        } else {
            let tr = linalg::trace_re(&s).abs();
            beyond += &s;
            if tr <= 1e-18 * (1.0 + linalg::trace_re(&beyond).abs()) {
                quiet += 1;
                if quiet >= deg {
                    converged = true;
                    break;
                }
            } else {
                quiet = 0;
            }
            if j >= m + TAIL_MAX_STEPS {
                break;
            }
        }
        if window.len() == deg {
            window.pop_front();
        }
        window.push_back(s);
        j += 1;
    }
    let mut tails = vec![CMat::zeros(d, d); m + 1];
    tails[m] = beyond;
    for k in (0..m).rev() {
        tails[k] = &tails[k + 1] + &head[k + 1];
    }
    (tails, converged)
}

/// `‖K*K − I‖`.
pub fn kk_residual(p: &PoissonKernel) -> f64 {
    let kk = p.k.adjoint() * &p.k;
    linalg::spectral_norm(&(kk - CMat::identity(p.d, p.d)))
}

/// `‖K*K + Σ_{j>m} S_j − I‖`, zero for pure tuples up to rounding.
pub fn kk_tail_residual(p: &PoissonKernel) -> f64 {
    let kk = p.k.adjoint() * &p.k + &p.tails[p.level];
    linalg::spectral_norm(&(kk - CMat::identity(p.d, p.d)))
}

/// `max_i ‖K T_i* − (W_i* ⊗ I) K‖` on rows of degree `≤ m − 1`.
pub fn intertwine_residual(p: &PoissonKernel, fock: &TruncatedFock, t: &OperatorTuple) -> f64 {
    let rows = p.rows_upto(fock, fock.level() - 1);
    let mut worst: f64 = 0.0;
    for i in 0..t.n() {
        let lhs = &p.k * t.mat(i).adjoint();
        let rhs = fock.w(i).kron_apply_adjoint(&p.k, p.d);
        let diff = (lhs - rhs).rows(0, rows).into_owned();
        worst = worst.max(linalg::spectral_norm(&diff));
    }
    worst
}

#[derive(Clone, Debug, Serialize)]
pub struct TransformCheck {
    pub alpha: Word,
    pub beta: Word,
    /// `‖K*(W_α W_β* ⊗ I)K − T_α T_β*‖`.
    pub raw_residual: f64,
    /// Same, after adding back `T_α (Σ_{j > m − max(|α|,|β|)} S_j) T_β*`.
    pub tail_corrected_residual: f64,
    pub tail_norm: f64,
}

/// Poisson transform of `W_α W_β*` against `T_α T_β*`.
pub fn poisson_transform(
    p: &PoissonKernel,
    fock: &TruncatedFock,
    t: &OperatorTuple,
    alpha: &Word,
    beta: &Word,
) -> Result<(CMat, TransformCheck)> {
    let top = alpha.len().max(beta.len());
    if top > fock.level() {
        return Err(Error::input("words", "word longer than the truncation level"));
    }
    let ya = fock.word_op(Side::Left, alpha).kron_apply_adjoint(&p.k, p.d);
    let yb = fock.word_op(Side::Left, beta).kron_apply_adjoint(&p.k, p.d);
    let value = ya.adjoint() * yb;
    let ta = t.word(alpha);
    let tb_adj = t.word(beta).adjoint();
    let target = &ta * &tb_adj;
    let tail = &ta * &p.tails[fock.level() - top] * &tb_adj;
    let raw = linalg::spectral_norm(&(&value - &target));
    let corrected = linalg::spectral_norm(&(&value + &tail - &target));
    let check = TransformCheck {
        alpha: alpha.clone(),
        beta: beta.clone(),
        raw_residual: raw,
        tail_corrected_residual: corrected,
        tail_norm: linalg::spectral_norm(&tail),
    };
    Ok((value, check))
}

#[derive(Clone, Debug, Serialize)]
pub struct PoissonReport {
    pub kk_residual: f64,
    pub kk_tail_residual: f64,
    pub intertwine_residual: f64,
    pub transform_residual: f64,
    pub transform_raw_residual: f64,
    pub tail_bound: f64,
    pub tail_converged: bool,
    pub defect_rank: usize,
    pub interior_degree: usize,
}

/// All Poisson identities, the transform over every word pair of length `≤ max_len`.
pub fn verify(f: &FreeSymbol, t: &OperatorTuple, fock: &TruncatedFock, max_len: usize) -> Result<PoissonReport> {
    let p = build_poisson(f, t, fock)?;
    let words = crate::words::enumerate_words(f.n(), max_len.min(fock.level()));
    let mut pairs = Vec::new();
    for a in &words {
        for b in &words {
            pairs.push((a.clone(), b.clone()));
        }
    }
    let checks = par::map_slice(&pairs, |(a, b)| poisson_transform(&p, fock, t, a, b).map(|(_, c)| c));
    let mut corrected: f64 = 0.0;
    let mut raw: f64 = 0.0;
    for c in checks {
        let c = c?;
        corrected = corrected.max(c.tail_corrected_residual);
        raw = raw.max(c.raw_residual);
    }
    Ok(PoissonReport {
        kk_residual: kk_residual(&p),
        kk_tail_residual: kk_tail_residual(&p),
        intertwine_residual: intertwine_residual(&p, fock, t),
        transform_residual: corrected,
        transform_raw_residual: raw,
        tail_bound: p.tail_bound(),
        tail_converged: p.tail_converged,
        defect_rank: p.defect_rank,
        interior_degree: fock.level() - 1,
    })
}

#[derive(Clone, Debug)]
pub struct BeurlingFactor {
    /// `Ψ = Y^{1/2} K*`, from `Fock ⊗ ℂ^r` to `Fock ⊗ ℂ^h`.
    pub psi: CMat,
    /// `T = A*` acting on `range(Y^{1/2}) ≅ ℂ^r`.
    pub tuple: OperatorTuple,
    pub report: BeurlingReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct BeurlingReport {
    pub rank: usize,
    pub precondition_min_eig: f64,
    pub tolerance: f64,
    pub factor_residual: f64,
    pub multi_analytic_residual: f64,
    pub kernel_tail: f64,
    pub interior_degree: usize,
}

/// `Σ a_β (W_β ⊗ I_h) Y (W_β* ⊗ I_h)`.
pub fn phi_model(fock: &TruncatedFock, y: &CMat, h: usize) -> CMat {
    let f = fock.symbol();
    let terms: Vec<(&Word, f64)> = f.support().collect();
    let parts = par::map_slice(&terms, |&(beta, a)| {
        let op = fock.word_op(Side::Left, beta);
        let left = op.kron_apply(y, h);
        op.kron_apply(&left.adjoint(), h).adjoint().scale(a)
    });
    let mut out = CMat::zeros(y.nrows(), y.ncols());
    for p in parts {
        out += p;
    }
    out
}

/// Factors a `Φ`-subharmonic `Y ⪰ 0` on `Fock_m ⊗ ℂ^h` as `Y ≈ ΨΨ*` with `Ψ` multi-analytic.
pub fn beurling_factorize(f: &FreeSymbol, fock: &TruncatedFock, y: &CMat, h: usize) -> Result<BeurlingFactor> {
    if fock.symbol() != f {
        return Err(Error::input("fock", "model was built for a different symbol"));
    }
    let dim = fock.dim() * h;
    if y.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch(format!("Y must be {dim}x{dim}")));
    }
    let y = linalg::hermitian_part(y);
    let interior = fock.level().saturating_sub(f.support_degree());
    let ki = fock.dim_upto(interior) * h;
    let gap = &y - phi_model(fock, &y, h);
    let pre = linalg::min_eigenvalue(&gap.view((0, 0), (ki, ki)).into_owned());
    let y_norm = linalg::max_eigenvalue(&y).max(0.0);
    let tolerance = crate::tuples::eps_psd(y_norm);
    if pre < -tolerance || linalg::min_eigenvalue(&y) < -tolerance {
        return Err(Error::Precondition(format!(
            "Y is not Φ-subharmonic on degrees ≤ {interior}: λ_min(Y − Φ(Y)) = {pre:e}"
        )));
    }

    let eig = y.clone().symmetric_eigen();
    let keep: Vec<usize> = (0..dim).filter(|&j| eig.eigenvalues[j] > RANK_CUT * y_norm).collect();
    let r = keep.len();
    if r == 0 {
        return Err(Error::Precondition("Y is zero".into()));
    }
    let v = CMat::from_fn(dim, r, |row, c| eig.eigenvectors[(row, keep[c])]);
    let s_half: Vec<f64> = keep.iter().map(|&j| eig.eigenvalues[j].sqrt()).collect();
    let mats = (0..f.n())
        .map(|i| {
            let wv = fock.w(i).kron_apply_adjoint(&v, h);
            let core = v.adjoint() * wv;
            let a = CMat::from_fn(r, r, |p, q| core[(p, q)] * (s_half[p] / s_half[q]));
            a.adjoint()
        })
        .collect();
    let tuple = OperatorTuple::new(mats)?;
    let kernel = build_poisson(f, &tuple, fock)?;
    let y_half = CMat::from_fn(dim, r, |row, c| v[(row, c)] * C64::new(s_half[c], 0.0));
    let psi = &y_half * kernel.k.adjoint();

    let factor_residual = {
        let diff = &psi * psi.adjoint() - &y;
        linalg::spectral_norm(&diff.view((0, 0), (ki, ki)).into_owned())
    };
    let kr = fock.dim_upto(interior) * r;
    let mut multi: f64 = 0.0;
    for i in 0..f.n() {
        let right = fock.w(i).kron_apply_adjoint(&psi.adjoint(), r).adjoint();
        let left = fock.w(i).kron_apply(&psi, h);
        let diff = (right - left).view((0, 0), (ki, kr)).into_owned();
        multi = multi.max(linalg::spectral_norm(&diff));
    }
    let report = BeurlingReport {
        rank: r,
        precondition_min_eig: pre,
        tolerance,
        factor_residual,
        multi_analytic_residual: multi,
        kernel_tail: kernel.tail_bound(),
        interior_degree: interior,
    };
    Ok(BeurlingFactor { psi, tuple, report })
}
