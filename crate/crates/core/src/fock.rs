//! Level-`m` truncation of the weighted Fock space and the universal model.
//!
//! Basis vectors `e_α`, `|α| ≤ m`, are indexed by graded position. The left
//! shifts act by `W_i e_α = sqrt(b_α / b_{g_i α}) e_{g_i α}` and the right
//! shifts by `Λ_i e_α = sqrt(b_α / b_{α g_i}) e_{α g_i}`; both annihilate the
//! top degree. Every shift and word product has at most one nonzero per
//! column, which is how [`Monomial`] stores them.

use serde::Serialize;

use crate::kernel::{point_in_domain, PointClass};
use crate::linalg::{self, CMat, CVec, C64, ZERO};
use crate::par;
use crate::symbol::{compute_b, reverse_symbol, BTable, Coeffs, FreeSymbol};
use crate::words::{enumerate_words, word_count, Word};
use crate::{Error, Result};

pub type FockVector = CVec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Operator with at most one nonzero per column: `e_c ↦ w e_r`.
#[derive(Clone, Debug)]
pub struct Monomial {
    targets: Vec<Option<(usize, f64)>>,
}

impl Monomial {
    pub fn dim(&self) -> usize {
        self.targets.len()
    }

    pub fn target(&self, col: usize) -> Option<(usize, f64)> {
        self.targets[col]
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.targets.iter().enumerate().filter_map(|(c, t)| t.map(|(r, w)| (r, c, w)))
    }

    pub fn to_dense(&self) -> CMat {
        let mut out = CMat::zeros(self.dim(), self.dim());
        for (r, c, w) in self.entries() {
            out[(r, c)] = C64::new(w, 0.0);
        }
        out
    }

    pub fn apply(&self, x: &CVec) -> CVec {
        let mut out = CVec::zeros(x.len());
        for (r, c, w) in self.entries() {
            out[r] += x[c] * w;
        }
        out
    }

    pub fn apply_adjoint(&self, x: &CVec) -> CVec {
        let mut out = CVec::zeros(x.len());
        for (r, c, w) in self.entries() {
            out[c] += x[r] * w;
        }
        out
    }

    /// `(M ⊗ I_d) X` for `X` with `dim·d` rows, word-major.
    pub fn kron_apply(&self, x: &CMat, d: usize) -> CMat {
        let mut out = CMat::zeros(x.nrows(), x.ncols());
        for (r, c, w) in self.entries() {
            for j in 0..d {
                let src = x.row(c * d + j) * C64::new(w, 0.0);
                let mut dst = out.row_mut(r * d + j);
                dst += src;
            }
        }
        out
    }

    /// `(M* ⊗ I_d) X`.
    pub fn kron_apply_adjoint(&self, x: &CMat, d: usize) -> CMat {
        let mut out = CMat::zeros(x.nrows(), x.ncols());
        for (r, c, w) in self.entries() {
            for j in 0..d {
                let src = x.row(r * d + j) * C64::new(w, 0.0);
                let mut dst = out.row_mut(c * d + j);
                dst += src;
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct TruncatedFock {
    f: FreeSymbol,
    m: usize,
    dim: usize,
    basis: Vec<Word>,
    b: BTable,
    w: Vec<Monomial>,
    l: Vec<Monomial>,
}

/// Builds the level-`m` model for `f`, refusing sizes above [`crate::dim_cap`].
pub fn build_fock(f: &FreeSymbol, m: usize) -> Result<TruncatedFock> {
    build_fock_with_cap(f, m, crate::dim_cap())
}

pub fn build_fock_with_cap(f: &FreeSymbol, m: usize, cap: usize) -> Result<TruncatedFock> {
    if m == 0 {
        return Err(Error::input("level", "truncation level must be at least 1"));
    }
    let n = f.n();
    let dim = word_count(n, m).ok_or(Error::DimensionCap { dim: usize::MAX, cap })?;
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    let b = compute_b(f, m + 1);
    let basis = enumerate_words(n, m);
    let mut fock = TruncatedFock { f: f.clone(), m, dim, basis, b, w: Vec::new(), l: Vec::new() };
    fock.w = (0..n).map(|i| fock.word_op(Side::Left, &Word::letter(i))).collect();
    fock.l = (0..n).map(|i| fock.word_op(Side::Right, &Word::letter(i))).collect();
    Ok(fock)
}

impl TruncatedFock {
    pub fn symbol(&self) -> &FreeSymbol {
        &self.f
    }

    pub fn n(&self) -> usize {
        self.f.n()
    }

    pub fn level(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[Word] {
        &self.basis
    }

    /// `b`-table up to degree `m + 1`.
    pub fn b(&self) -> &BTable {
        &self.b
    }

    pub fn index(&self, w: &Word) -> usize {
        w.graded_index(self.n())
    }

    /// Number of basis vectors of degree `≤ d`.
    pub fn dim_upto(&self, d: usize) -> usize {
        word_count(self.n(), d.min(self.m)).expect("bounded by dim")
    }

    /// Interior degree used by default in residual checks.
    pub fn default_interior(&self) -> usize {
        self.m.saturating_sub(self.f.support_degree() + 1)
    }

    pub fn w(&self, i: usize) -> &Monomial {
        &self.w[i]
    }

    pub fn l(&self, i: usize) -> &Monomial {
        &self.l[i]
    }

    pub fn w_dense(&self, i: usize) -> CMat {
        self.w[i].to_dense()
    }

    pub fn l_dense(&self, i: usize) -> CMat {
        self.l[i].to_dense()
    }

    /// `W_β` (left) or `Λ_β` (right) as a truncated monomial.
    ///
    /// `W_β e_α = sqrt(b_α/b_{βα}) e_{βα}`, `Λ_β e_α = sqrt(b_α/b_{αβ̃}) e_{αβ̃}`.
    pub fn word_op(&self, side: Side, beta: &Word) -> Monomial {
        let tail = match side {
            Side::Left => beta.clone(),
            Side::Right => beta.reverse(),
        };
        let targets = self
            .basis
            .iter()
            .map(|alpha| {
                if alpha.len() + tail.len() > self.m {
                    return None;
                }
                let img = match side {
                    Side::Left => tail.concat(alpha),
                    Side::Right => alpha.concat(&tail),
                };
                let wgt = (self.b.get(alpha) / self.b.get(&img)).sqrt();
                Some((self.index(&img), wgt))
            })
            .collect();
        Monomial { targets }
    }

    fn check_coeffs(&self, c: &Coeffs) -> Result<()> {
        for w in c.keys() {
            if !w.fits(self.n()) {
                return Err(Error::input("coeffs", format!("word {w} has a letter out of range")));
            }
            if w.len() > self.m {
                return Err(Error::input("coeffs", format!("word {w} is longer than level {}", self.m)));
            }
        }
        Ok(())
    }

    /// `Σ c_β W_β` (left) or `Σ c_{β̃} Λ_β` (right) as a dense matrix.
    pub fn eval_poly(&self, side: Side, c: &Coeffs) -> Result<CMat> {
        self.check_coeffs(c)?;
        let terms: Vec<(&Word, C64)> = c.iter().map(|(w, &v)| (w, v)).filter(|(_, v)| *v != ZERO).collect();
        let cols = par::map_range(self.dim, |col| {
            let alpha = &self.basis[col];
            let mut entries = Vec::with_capacity(terms.len());
            for &(beta, v) in &terms {
                if alpha.len() + beta.len() > self.m {
                    continue;
                }
                let img = match side {
                    Side::Left => beta.concat(alpha),
                    Side::Right => alpha.concat(beta),
                };
                let wgt = (self.b.get(alpha) / self.b.get(&img)).sqrt();
                entries.push((self.index(&img), v * wgt));
            }
            entries
        });
        let mut out = CMat::zeros(self.dim, self.dim);
        for (col, entries) in cols.into_iter().enumerate() {
            for (row, v) in entries {
                out[(row, col)] += v;
            }
        }
        Ok(out)
    }

    pub fn vacuum(&self) -> FockVector {
        let mut v = CVec::zeros(self.dim);
        v[0] = C64::new(1.0, 0.0);
        v
    }

    /// Largest singular value of the compression of `a` to degrees `≤ d`.
    pub fn interior_norm(&self, a: &CMat, d: usize) -> Result<f64> {
        if a.nrows() != self.dim || a.ncols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, Fock dimension is {}",
                a.nrows(),
                a.ncols(),
                self.dim
            )));
        }
        if d > self.m {
            return Err(Error::input("d", "interior degree exceeds the level"));
        }
        let k = self.dim_upto(d);
        Ok(linalg::spectral_norm(&a.view((0, 0), (k, k)).into_owned()))
    }

    /// Nonzero weights of `W_i`, rounded to 12 digits, with multiplicities.
    pub fn weight_histogram(&self, i: usize) -> Vec<(f64, usize)> {
        let mut counts: std::collections::BTreeMap<i64, usize> = Default::default();
        for (_, _, w) in self.w[i].entries() {
            *counts.entry((w * 1e12).round() as i64).or_default() += 1;
        }
        counts.into_iter().map(|(k, v)| (k as f64 * 1e-12, v)).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DefectReport {
    pub residual: f64,
    pub interior_degree: usize,
}

/// `max_{|α| ≤ m − deg f} |⟨(I − Σ a_β W_β W_β*) e_α, e_α⟩ − δ_{α,ε}|`.
pub fn defect_residual(fock: &TruncatedFock) -> DefectReport {
    let deg = fock.f.support_degree();
    let interior = fock.m.saturating_sub(deg);
    let k = fock.dim_upto(interior);
    let ops: Vec<(Monomial, f64)> = fock.f.support().map(|(beta, a)| (fock.word_op(Side::Left, beta), a)).collect();
    let diag = par::map_range(k, |idx| {
        let mut e = CVec::zeros(fock.dim);
        e[idx] = C64::new(1.0, 0.0);
        let mut acc = e.clone();
        for (op, a) in &ops {
            acc -= op.apply(&op.apply_adjoint(&e)) * C64::new(*a, 0.0);
        }
        acc[idx].re
    });
    let residual =
        diag.iter().enumerate().map(|(idx, &v)| (v - if idx == 0 { 1.0 } else { 0.0 }).abs()).fold(0.0, f64::max);
    DefectReport { residual, interior_degree: interior }
}

/// Max-entry distance between `U* Λ_i U` for `f` and `W_i` for `f̃`, `U e_α = e_{α̃}`.
pub fn reversal_residual(f: &FreeSymbol, m: usize) -> Result<f64> {
    let fock = build_fock(f, m)?;
    let rev = build_fock(&reverse_symbol(f), m)?;
    let perm: Vec<usize> = fock.basis.iter().map(|a| fock.index(&a.reverse())).collect();
    let mut worst: f64 = 0.0;
    for i in 0..f.n() {
        let l = fock.l_dense(i);
        let conj = CMat::from_fn(fock.dim, fock.dim, |r, c| l[(perm[r], perm[c])]);
        worst = worst.max(linalg::max_abs(&(conj - rev.w_dense(i))));
    }
    Ok(worst)
}

/// `max_{i,j} ‖W_i Λ_j x − Λ_j W_i x‖` over basis inputs of degree `≤ m − 2`.
pub fn commutation_residual(fock: &TruncatedFock) -> f64 {
    let k = fock.dim_upto(fock.m.saturating_sub(2));
    let mut worst: f64 = 0.0;
    for i in 0..fock.n() {
        for j in 0..fock.n() {
            for idx in 0..k {
                let mut e = CVec::zeros(fock.dim);
                e[idx] = C64::new(1.0, 0.0);
                let lhs = fock.w[i].apply(&fock.l[j].apply(&e));
                let rhs = fock.l[j].apply(&fock.w[i].apply(&e));
                worst = worst.max((lhs - rhs).norm());
            }
        }
    }
    worst
}

#[derive(Clone, Debug, Serialize)]
pub struct SimilarityReport {
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub residual: f64,
    pub interior_degree: usize,
}

/// Similarity of two models through `D = diag sqrt(b'_α / b_α)`.
///
/// Checks `D W'_i = W_i D` on inputs of degree `≤ m − 1`, where `W` belongs
/// to `fock` and `W'` to `other`.
pub fn similarity_residual(fock: &TruncatedFock, other: &TruncatedFock) -> Result<SimilarityReport> {
    if fock.n() != other.n() || fock.m != other.m {
        return Err(Error::DimensionMismatch("models differ in n or level".into()));
    }
    let ratios: Vec<f64> = fock.basis.iter().map(|a| other.b.get(a) / fock.b.get(a)).collect();
    let d: Vec<f64> = ratios.iter().map(|r| r.sqrt()).collect();
    let k = fock.dim_upto(fock.m - 1);
    let mut residual: f64 = 0.0;
    for i in 0..fock.n() {
        for col in 0..k {
            let (r1, w1) = other.w[i].target(col).expect("interior column");
            let (r2, w2) = fock.w[i].target(col).expect("interior column");
            debug_assert_eq!(r1, r2);
            residual = residual.max((d[r1] * w1 - w2 * d[col]).abs());
        }
    }
    Ok(SimilarityReport {
        ratio_min: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        ratio_max: ratios.iter().copied().fold(0.0, f64::max),
        residual,
        interior_degree: fock.m - 1,
    })
}

/// `Σ_j 2^{-j} d_j / (1 + d_j)` with `d_j = ‖φ(r_j W) − ψ(r_j W)‖`.
pub fn hol_metric(fock: &TruncatedFock, c1: &Coeffs, c2: &Coeffs, radii: &[f64]) -> Result<f64> {
    for (j, &r) in radii.iter().enumerate() {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::input("radii", format!("radius {r} is not in (0,1)")));
        }
        if j > 0 && r <= radii[j - 1] {
            return Err(Error::input("radii", "radii must be strictly increasing"));
        }
    }
    let mut diff = c1.clone();
    for (w, v) in c2 {
        *diff.entry(w.clone()).or_insert(ZERO) -= v;
    }
    let mut rho = 0.0;
    for (j, &r) in radii.iter().enumerate() {
        let scaled: Coeffs = diff.iter().map(|(w, v)| (w.clone(), v * r.powi(w.len() as i32))).collect();
        let a = fock.eval_poly(Side::Left, &scaled)?;
        let d = fock.interior_norm(&a, fock.m)?;
        rho += 0.5f64.powi(j as i32 + 1) * d / (1.0 + d);
    }
    Ok(rho)
}

#[derive(Clone, Debug, Serialize)]
pub struct WienerLevel {
    pub k: usize,
    pub lhs: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WienerReport {
    pub norm_upper_bound: f64,
    pub observed_norm: f64,
    pub c0_abs: f64,
    pub levels: Vec<WienerLevel>,
    pub holds: bool,
}

/// Wiener coefficient inequality after scaling `c` by `1 / norm_ub`.
pub fn wiener_check(fock: &TruncatedFock, c: &Coeffs, norm_ub: f64) -> Result<WienerReport> {
    if norm_ub.is_nan() || norm_ub <= 0.0 {
        return Err(Error::input("norm_ub", "must be positive"));
    }
    let observed = fock.interior_norm(&fock.eval_poly(Side::Left, c)?, fock.m)?;
    if norm_ub < observed * (1.0 - 1e-12) {
        return Err(Error::Precondition(format!("norm bound {norm_ub} is below the compressed norm {observed}")));
    }
    let c0 = c.get(&Word::empty()).copied().unwrap_or(ZERO).norm() / norm_ub;
    let top = c.keys().map(Word::len).max().unwrap_or(0);
    let mut sums = vec![0.0; top + 1];
    for (w, v) in c {
        sums[w.len()] += (v / norm_ub).norm_sqr() / fock.b.get(w);
    }
    let levels: Vec<WienerLevel> = (1..=top)
        .map(|k| {
            let lhs = sums[k].sqrt();
            WienerLevel { k, lhs, margin: 1.0 - c0 * c0 - lhs }
        })
        .collect();
    let holds = levels.iter().all(|l| l.margin >= -1e-12);
    Ok(WienerReport { norm_upper_bound: norm_ub, observed_norm: observed, c0_abs: c0, levels, holds })
}

#[derive(Clone, Debug, Serialize)]
pub struct BohrReport {
    pub margin: f64,
    pub coefficient_sum: f64,
    pub gauge_of_3lambda: f64,
    pub in_domain: bool,
}

/// `norm_ub − Σ |c_β| |λ_β|`, together with whether `3λ ∈ D_f(ℂ)`.
pub fn bohr_margin(fock: &TruncatedFock, c: &Coeffs, lambda: &[C64], norm_ub: f64) -> Result<BohrReport> {
    if norm_ub.is_nan() || norm_ub <= 0.0 {
        return Err(Error::input("norm_ub", "must be positive"));
    }
    fock.check_coeffs(c)?;
    let tripled: Vec<C64> = lambda.iter().map(|z| z * 3.0).collect();
    let p = point_in_domain(&fock.f, &tripled)?;
    let sum: f64 = c.iter().map(|(w, v)| v.norm() * w.eval_scalar(lambda).norm()).sum();
    Ok(BohrReport {
        margin: norm_ub - sum,
        coefficient_sum: sum,
        gauge_of_3lambda: p.gauge,
        in_domain: p.class != PointClass::Exterior,
    })
}

/// Bohr margin, rejecting points with `3λ ∉ D_f(ℂ)`.
pub fn bohr_check(fock: &TruncatedFock, c: &Coeffs, lambda: &[C64], norm_ub: f64) -> Result<f64> {
    let r = bohr_margin(fock, c, lambda, norm_ub)?;
    if !r.in_domain {
        return Err(Error::OutsideDomain(format!(
            "3λ has gauge {} > 1, so λ is not in the 1/3-domain",
            r.gauge_of_3lambda
        )));
    }
    Ok(r.margin)
}
