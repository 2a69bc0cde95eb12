//! Concrete operator tuples: the completely positive map `Φ_{f,T}`, domain
//! membership, purity, joint spectral radius, the Cauchy kernel and the
//! polynomial functional calculus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::blockop::BlockOp;
use crate::fock::TruncatedFock;
use crate::linalg::{self, CMat, CVec, SparseMat, C64, ZERO};
use crate::par;
use crate::symbol::{Coeffs, FreeSymbol};
use crate::words::Word;
use crate::{Error, Result};

pub const EPS_PURE: f64 = 1e-8;
pub const EPS_CNC: f64 = 1e-8;
pub const DEFAULT_KMAX: usize = 200;
pub const BORDERLINE_BAND: f64 = 1e-3;

/// Membership tolerance `1e-9 · (1 + ‖Φ(I)‖)`.
pub fn eps_psd(phi_norm: f64) -> f64 {
    1e-9 * (1.0 + phi_norm)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorTuple {
    d: usize,
    mats: Vec<CMat>,
}

impl OperatorTuple {
    pub fn new(mats: Vec<CMat>) -> Result<Self> {
        let d = mats.first().map(|m| m.nrows()).ok_or_else(|| Error::input("mats", "tuple is empty"))?;
        for (i, m) in mats.iter().enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "matrix {i} is {}x{}, expected {d}x{d}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::input(format!("mats[{i}]"), "entries must be finite"));
            }
        }
        Ok(OperatorTuple { d, mats })
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        OperatorTuple { d, mats: vec![CMat::zeros(d, d); n] }
    }

    /// The `1×1` tuple of a scalar point.
    pub fn scalar(lambda: &[C64]) -> Self {
        OperatorTuple { d: 1, mats: lambda.iter().map(|&z| CMat::from_element(1, 1, z)).collect() }
    }

    /// `(W_1 ⊗ I_c, …, W_n ⊗ I_c)` from a truncated model.
    pub fn model(fock: &TruncatedFock, c: usize) -> Self {
        let mats = (0..fock.n()).map(|i| linalg::kron_identity(&fock.w_dense(i), c)).collect();
        OperatorTuple { d: fock.dim() * c, mats }
    }

    pub fn n(&self) -> usize {
        self.mats.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn mat(&self, i: usize) -> &CMat {
        &self.mats[i]
    }

    pub fn mats(&self) -> &[CMat] {
        &self.mats
    }

    /// `T_α = T_{i_1} ⋯ T_{i_k}`.
    pub fn word(&self, alpha: &Word) -> CMat {
        let mut out = CMat::identity(self.d, self.d);
        for &i in alpha.letters() {
            out *= &self.mats[i];
        }
        out
    }

    pub fn scale(&self, r: f64) -> Self {
        OperatorTuple { d: self.d, mats: self.mats.iter().map(|m| m.scale(r)).collect() }
    }

    pub fn direct_sum(&self, other: &OperatorTuple) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch("tuples differ in length".into()));
        }
        let d = self.d + other.d;
        let mats = self
            .mats
            .iter()
            .zip(&other.mats)
            .map(|(a, b)| {
                let mut m = CMat::zeros(d, d);
                m.view_mut((0, 0), (self.d, self.d)).copy_from(a);
                m.view_mut((self.d, self.d), (other.d, other.d)).copy_from(b);
                m
            })
            .collect();
        Ok(OperatorTuple { d, mats })
    }

    /// `(Q* T_i Q)` for `Q` with orthonormal columns.
    pub fn compress(&self, q: &CMat) -> Result<Self> {
        if q.nrows() != self.d {
            return Err(Error::DimensionMismatch("compression basis has wrong row count".into()));
        }
        OperatorTuple::new(self.mats.iter().map(|m| q.adjoint() * m * q).collect())
    }

    pub fn commutator_norm(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                let c = &self.mats[i] * &self.mats[j] - &self.mats[j] * &self.mats[i];
                worst = worst.max(linalg::frobenius(&c));
            }
        }
        worst
    }
}

fn check_n(f: &FreeSymbol, t: &OperatorTuple) -> Result<()> {
    if f.n() != t.n() {
        return Err(Error::DimensionMismatch(format!("symbol has n = {}, tuple has {} matrices", f.n(), t.n())));
    }
    Ok(())
}

enum Factor {
    Dense(CMat),
    Sparse(SparseMat, SparseMat),
}

/// Precomputed word products for repeated application of `Φ` and `Φ*`.
pub struct PhiMap {
    d: usize,
    terms: Vec<(f64, Factor)>,
}

impl PhiMap {
    pub fn new(f: &FreeSymbol, t: &OperatorTuple) -> Result<Self> {
        check_n(f, t)?;
        let support: Vec<(&Word, f64)> = f.support().collect();
        let d = t.d;
        let terms = par::map_slice(&support, |&(w, a)| {
            let m = t.word(w);
            let nnz = m.iter().filter(|z| **z != ZERO).count();
            let factor = if d >= 32 && nnz * 4 < d * d {
                Factor::Sparse(SparseMat::from_dense(&m), SparseMat::from_dense(&m.adjoint()))
            } else {
                Factor::Dense(m)
            };
            (a, factor)
        });
        Ok(PhiMap { d, terms })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `Φ(X) = Σ a_α T_α X T_α*`.
    pub fn apply(&self, x: &CMat) -> CMat {
        self.sum(x, false)
    }

    /// `Φ*(X) = Σ a_α T_α* X T_α`.
    pub fn apply_adjoint(&self, x: &CMat) -> CMat {
        self.sum(x, true)
    }

    fn sum(&self, x: &CMat, adjoint: bool) -> CMat {
        let parts = par::map_slice(&self.terms, |(a, factor)| {
            let y = match (factor, adjoint) {
                (Factor::Dense(m), false) => m * x * m.adjoint(),
                (Factor::Dense(m), true) => m.adjoint() * x * m,
                (Factor::Sparse(s, _), false) => s.sandwich(x),
                (Factor::Sparse(_, s), true) => s.sandwich(x),
            };
            y * C64::new(*a, 0.0)
        });
        let mut out = CMat::zeros(self.d, self.d);
        for p in parts {
            out += p;
        }
        out
    }
}

pub fn phi_apply(f: &FreeSymbol, t: &OperatorTuple, x: &CMat) -> Result<CMat> {
    if x.shape() != (t.d, t.d) {
        return Err(Error::DimensionMismatch(format!(
            "X is {}x{}, tuple acts on dimension {}",
            x.nrows(),
            x.ncols(),
            t.d
        )));
    }
    Ok(PhiMap::new(f, t)?.apply(x))
}

#[derive(Clone, Debug, Serialize)]
pub struct Membership {
    pub member: bool,
    pub defect_min_eig: f64,
    pub phi_norm: f64,
    pub tolerance: f64,
}

pub fn membership(f: &FreeSymbol, t: &OperatorTuple) -> Result<Membership> {
    let phi = PhiMap::new(f, t)?.apply(&CMat::identity(t.d, t.d));
    let phi_norm = linalg::max_eigenvalue(&phi).max(0.0);
    let defect = CMat::identity(t.d, t.d) - phi;
    let defect_min_eig = linalg::min_eigenvalue(&defect);
    let tolerance = eps_psd(phi_norm);
    Ok(Membership { member: defect_min_eig >= -tolerance, defect_min_eig, phi_norm, tolerance })
}

/// Gauge of a tuple, `‖Φ_{f,T}(I)‖`.
pub fn gauge(f: &FreeSymbol, t: &OperatorTuple) -> Result<f64> {
    Ok(membership(f, t)?.phi_norm)
}

#[derive(Clone, Debug, Serialize)]
pub struct DomainReport {
    pub member: bool,
    pub defect_min_eig: f64,
    pub tolerance: f64,
    pub pure: bool,
    pub cnc: bool,
    pub q_norm: f64,
    pub q_max_eig: f64,
    pub spectral_radius: f64,
    /// `‖Φ^k(I)‖` for `k = 1, 2, …`.
    pub trend: Vec<f64>,
    pub iterations: usize,
    pub stabilized: bool,
    pub warnings: Vec<String>,
}

/// Iterates `Φ^k(I)` to decide purity and complete non-coisometry.
pub fn classify(f: &FreeSymbol, t: &OperatorTuple, k_max: usize) -> Result<DomainReport> {
    let mem = membership(f, t)?;
    if !mem.member {
        return Err(Error::Precondition(format!(
            "tuple is not in the domain (λ_min(I − Φ(I)) = {:e})",
            mem.defect_min_eig
        )));
    }
    let phi = PhiMap::new(f, t)?;
    let mut x = CMat::identity(t.d, t.d);
    let mut trend = Vec::new();
    let mut stabilized = false;
    for _ in 0..k_max {
        let next = linalg::hermitian_part(&phi.apply(&x));
        let step = linalg::frobenius(&(&next - &x));
        x = next;
        let norm = linalg::max_eigenvalue(&x).max(0.0);
        trend.push(norm);
        if norm <= EPS_PURE * 1e-8 {
            stabilized = true;
            break;
        }
        if step <= 1e-15 * (1.0 + linalg::frobenius(&x)) {
            stabilized = true;
            break;
        }
    }
    let q_norm = trend.last().copied().unwrap_or(1.0);
    let q_max_eig = linalg::max_eigenvalue(&x);
    let first = trend.first().copied().unwrap_or(1.0);
    let pure = q_norm <= EPS_PURE && q_norm <= first;
    let cnc = pure || q_max_eig < 1.0 - EPS_CNC;
    let mut warnings = Vec::new();
    if !stabilized && !pure {
        warnings.push(format!("trend of ‖Φ^k(I)‖ not stabilized within k_max = {k_max}"));
    }
    let sr = spectral_radius(f, t, k_max)?;
    Ok(DomainReport {
        member: true,
        defect_min_eig: mem.defect_min_eig,
        tolerance: mem.tolerance,
        pure,
        cnc,
        q_norm,
        q_max_eig,
        spectral_radius: sr.value,
        iterations: trend.len(),
        trend,
        stabilized,
        warnings,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralRadius {
    pub value: f64,
    /// `‖Φ^k(I)‖^{1/2k}` for `k = 1, 2, …`.
    pub trend: Vec<f64>,
    /// True when `Φ^k(I)` vanished exactly.
    pub nilpotent: bool,
}

/// `r_f(T) = lim ‖Φ^k(I)‖^{1/2k}` by renormalized power iteration.
pub fn spectral_radius(f: &FreeSymbol, t: &OperatorTuple, k_max: usize) -> Result<SpectralRadius> {
    let phi = PhiMap::new(f, t)?;
    let mut x = CMat::identity(t.d, t.d);
    let mut log_norm = 0.0;
    let mut trend = Vec::new();
    for k in 1..=k_max.max(1) {
        let y = linalg::hermitian_part(&phi.apply(&x));
        let s = linalg::max_eigenvalue(&y);
        if s <= 0.0 {
            return Ok(SpectralRadius { value: 0.0, trend, nilpotent: true });
        }
        log_norm += s.ln();
        x = y / C64::new(s, 0.0);
        trend.push((log_norm / (2.0 * k as f64)).exp());
    }
    Ok(SpectralRadius { value: *trend.last().expect("at least one step"), trend, nilpotent: false })
}

fn check_model(f: &FreeSymbol, t: &OperatorTuple, fock: &TruncatedFock) -> Result<()> {
    check_n(f, t)?;
    if fock.symbol() != f {
        return Err(Error::input("fock", "model was built for a different symbol"));
    }
    Ok(())
}

/// `R = Σ_{σ ∈ supp f} a_σ Λ_{σ̃} ⊗ T_σ*`, block `(γσ, γ)` equal to `a_σ sqrt(b_γ/b_{γσ}) T_σ*`.
pub fn reconstruction_operator(f: &FreeSymbol, t: &OperatorTuple, fock: &TruncatedFock) -> Result<BlockOp> {
    check_model(f, t, fock)?;
    let d = t.d;
    let mut out = BlockOp::zeros(fock.dim(), fock.dim(), d, d);
    for (sigma, a) in f.support() {
        let ts = t.word(sigma).adjoint();
        for gamma in fock.basis() {
            if gamma.len() + sigma.len() > fock.level() {
                continue;
            }
            let img = gamma.concat(sigma);
            let w = a * (fock.b().get(gamma) / fock.b().get(&img)).sqrt();
            out.add_block(fock.index(&img), fock.index(gamma), &ts.scale(w));
        }
    }
    Ok(out)
}

/// `(I − R)^{-1}` by block forward substitution; exact because `R` raises degree.
pub(crate) fn cauchy_solve(f: &FreeSymbol, t: &OperatorTuple, fock: &TruncatedFock) -> Result<BlockOp> {
    let r = reconstruction_operator(f, t, fock)?;
    let d = t.d;
    let mut c = BlockOp::zeros(fock.dim(), fock.dim(), d, d);
    let id = CMat::identity(d, d);
    for level in 0..=fock.level() {
        let lo = fock.dim_upto(level) - fock.basis().iter().filter(|w| w.len() == level).count();
        let hi = fock.dim_upto(level);
        let rows = par::map_range(hi - lo, |off| {
            let row = lo + off;
            let mut acc: std::collections::BTreeMap<usize, CMat> = Default::default();
            acc.insert(row, id.clone());
            for (&k, rblk) in r.row(row) {
                for (&col, cblk) in c.row(k) {
                    let prod = rblk * cblk;
                    match acc.get_mut(&col) {
                        Some(x) => *x += prod,
                        None => {
                            acc.insert(col, prod);
                        }
                    }
                }
            }
            acc
        });
        for (off, row) in rows.into_iter().enumerate() {
            for (col, blk) in row {
                c.add_block(lo + off, col, &blk);
            }
        }
    }
    Ok(c)
}

#[derive(Clone, Debug)]
pub struct CauchyKernel {
    pub op: BlockOp,
    pub spectral_radius: f64,
    pub warnings: Vec<String>,
}

/// `C_{f,T} = (I − Σ a_{α̃} Λ_α ⊗ T_{α̃}*)^{-1}` on `Fock_m ⊗ ℂ^d`.
pub fn cauchy_kernel(f: &FreeSymbol, t: &OperatorTuple, fock: &TruncatedFock) -> Result<CauchyKernel> {
    check_model(f, t, fock)?;
    let sr = spectral_radius(f, t, DEFAULT_KMAX)?.value;
    let mut warnings = Vec::new();
    if sr >= 1.0 + BORDERLINE_BAND {
        return Err(Error::Precondition(format!("joint spectral radius estimate {sr} is not below 1")));
    }
    if sr >= 1.0 - BORDERLINE_BAND {
        warnings.push(format!("joint spectral radius estimate {sr} is within {BORDERLINE_BAND} of 1"));
    }
    Ok(CauchyKernel { op: cauchy_solve(f, t, fock)?, spectral_radius: sr, warnings })
}

/// Fourier form `Σ_β Λ_β ⊗ b_{β̃} T_{β̃}*`: block `(γσ, γ)` is `sqrt(b_γ/b_{γσ}) b_σ T_σ*`.
pub fn cauchy_fourier(f: &FreeSymbol, t: &OperatorTuple, fock: &TruncatedFock) -> Result<BlockOp> {
    check_model(f, t, fock)?;
    let d = t.d;
    let mut out = BlockOp::zeros(fock.dim(), fock.dim(), d, d);
    let words = fock.basis();
    let adj: Vec<CMat> = par::map_slice(words, |s| t.word(s).adjoint());
    for gamma in words {
        for (si, sigma) in words.iter().enumerate() {
            if gamma.len() + sigma.len() > fock.level() {
                break;
            }
            let img = gamma.concat(sigma);
            let w = (fock.b().get(gamma) / fock.b().get(&img)).sqrt() * fock.b().get(sigma);
            out.add_block(fock.index(&img), fock.index(gamma), &adj[si].scale(w));
        }
    }
    Ok(out)
}

/// Neumann series `Σ_k R^k`, which terminates at truncation.
pub fn cauchy_neumann(f: &FreeSymbol, t: &OperatorTuple, fock: &TruncatedFock) -> Result<BlockOp> {
    let r = reconstruction_operator(f, t, fock)?;
    let mut acc = BlockOp::identity(fock.dim(), t.d);
    let mut power = BlockOp::identity(fock.dim(), t.d);
    for _ in 0..=fock.level() {
        power = power.mul(&r);
        if power.nnz_blocks() == 0 {
            break;
        }
        acc = acc.add(&power);
    }
    Ok(acc)
}

/// `Σ_{k ≤ k_max} ‖Φ^k(I)‖^{1/2}`, an upper bound for `‖C_{f,T}‖`.
pub fn cauchy_norm_bound(f: &FreeSymbol, t: &OperatorTuple, k_max: usize) -> Result<f64> {
    let phi = PhiMap::new(f, t)?;
    let mut x = CMat::identity(t.d, t.d);
    let mut sum = 1.0;
    for _ in 0..k_max {
        x = linalg::hermitian_part(&phi.apply(&x));
        let s = linalg::max_eigenvalue(&x).max(0.0);
        sum += s.sqrt();
        if s == 0.0 {
            break;
        }
    }
    Ok(sum)
}

#[derive(Clone, Debug)]
pub struct SeriesValue {
    pub value: CMat,
    pub max_degree_used: usize,
    pub warnings: Vec<String>,
}

/// `g(T) = Σ_k Σ_{|α|=k} c_α T_α` summed degree by degree up to `k_max`.
pub fn series_calculus(f: &FreeSymbol, t: &OperatorTuple, c: &Coeffs, k_max: usize) -> Result<SeriesValue> {
    check_n(f, t)?;
    for w in c.keys() {
        if !w.fits(t.n()) {
            return Err(Error::input("coeffs", format!("word {w} has a letter out of range")));
        }
    }
    let top = c.keys().map(Word::len).max().unwrap_or(0).min(k_max);
    let mut warnings = Vec::new();
    let sr = spectral_radius(f, t, DEFAULT_KMAX)?.value;
    if sr >= 1.0 - BORDERLINE_BAND {
        warnings.push(format!("joint spectral radius estimate {sr} is not safely below 1"));
    }
    let mut value = CMat::zeros(t.d, t.d);
    let mut norms: Vec<f64> = Vec::new();
    for k in 0..=top {
        let level: Vec<(&Word, C64)> = c.iter().filter(|(w, _)| w.len() == k).map(|(w, &v)| (w, v)).collect();
        let parts = par::map_slice(&level, |&(w, v)| t.word(w) * v);
        for p in parts {
            value += p;
        }
        norms.push(linalg::frobenius(&value));
        let growing = norms.len() >= 3 && norms.windows(2).rev().take(2).all(|p| p[1] > p[0]);
        if growing && norms[norms.len() - 1] > 1e12 {
            return Err(Error::Divergence(format!("partial sums reached {:e} at degree {k}", norms[k])));
        }
    }
    Ok(SeriesValue { value, max_degree_used: top, warnings })
}

/// `|⟨g(T)x, y⟩ − ⟨(g(W)⊗I)(1⊗x), C_{f,T}(1⊗y)⟩|`.
pub fn cauchy_identity_residual(
    f: &FreeSymbol,
    t: &OperatorTuple,
    fock: &TruncatedFock,
    c: &Coeffs,
    x: &CVec,
    y: &CVec,
) -> Result<f64> {
    let g_t = series_calculus(f, t, c, usize::MAX)?.value;
    let lhs = y.dotc(&(&g_t * x));
    let g_w = fock.eval_poly(crate::fock::Side::Left, c)?;
    let d = t.d;
    let mut u = CVec::zeros(fock.dim() * d);
    for r in 0..fock.dim() {
        let g = g_w[(r, 0)];
        if g != ZERO {
            for j in 0..d {
                u[r * d + j] = g * x[j];
            }
        }
    }
    let mut e_y = CMat::zeros(fock.dim() * d, 1);
    for j in 0..d {
        e_y[(j, 0)] = y[j];
    }
    let cy = cauchy_solve(f, t, fock)?.mul_dense(&e_y);
    let rhs: C64 = (0..u.len()).map(|i| cy[(i, 0)].conj() * u[i]).sum();
    Ok((lhs - rhs).norm())
}

/// Entries uniform in the unit square of `ℂ`.
/// Deterministic generator used by every randomized helper and check.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix<R: Rng>(rng: &mut R, d: usize) -> CMat {
    CMat::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_tuple<R: Rng>(rng: &mut R, n: usize, d: usize) -> OperatorTuple {
    OperatorTuple { d, mats: (0..n).map(|_| random_matrix(rng, d)).collect() }
}

/// Commuting tuple `T_i = Σ_k c_{ik} N^k` built from one random nilpotent-plus-diagonal `N`.
pub fn random_commuting_tuple<R: Rng>(rng: &mut R, n: usize, d: usize) -> OperatorTuple {
    let base = CMat::from_fn(d, d, |r, c| {
        if c >= r {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        } else {
            ZERO
        }
    });
    let mats = (0..n)
        .map(|_| {
            let mut acc = CMat::zeros(d, d);
            let mut pow = CMat::identity(d, d);
            for _ in 0..d {
                pow = &pow * &base;
                acc += &pow * C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
            acc
        })
        .collect();
    OperatorTuple { d, mats }
}

/// Rescales `t` so that `‖Φ_{f,rT}(I)‖ = target`, by bisection on `r`.
pub fn scale_to_gauge(f: &FreeSymbol, t: &OperatorTuple, target: f64) -> Result<OperatorTuple> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::input("target", "gauge target must be positive"));
    }
    let g = |r: f64| gauge(f, &t.scale(r));
    if g(1.0)? == 0.0 {
        return Err(Error::input("tuple", "Φ(I) vanishes; cannot rescale"));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while g(hi)? < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(t.scale(lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::build_fock;
    use crate::linalg::{frobenius, ONE};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w(v: &[usize]) -> Word {
        Word::new(v.to_vec())
    }

    fn mixed() -> FreeSymbol {
        FreeSymbol::new(2, [(w(&[0]), 1.0), (w(&[1]), 1.0), (w(&[0, 1]), 1.0)]).unwrap()
    }

    fn m2(v: [f64; 4]) -> CMat {
        CMat::from_row_slice(2, 2, &v.map(|x| C64::new(x, 0.0)))
    }

    #[test]
    fn phi_examples() {
        let f = mixed();
        let z = OperatorTuple::zeros(2, 3);
        assert_eq!(phi_apply(&f, &z, &CMat::identity(3, 3)).unwrap(), CMat::zeros(3, 3));

        let t = OperatorTuple::new(vec![m2([0.0, 1.0, 0.0, 0.0])]).unwrap();
        let p = phi_apply(&FreeSymbol::ball(1), &t, &CMat::identity(2, 2)).unwrap();
        assert_eq!(p, m2([1.0, 0.0, 0.0, 0.0]));

        let j = m2([0.3, 1.0, 0.0, 0.3]);
        let t = OperatorTuple::new(vec![j.scale(0.5), j.scale(0.25)]).unwrap();
        let x = m2([2.0, 0.5, 0.5, 1.0]);
        let brute = &t.mats[0] * &x * t.mats[0].adjoint()
            + &t.mats[1] * &x * t.mats[1].adjoint()
            + (&t.mats[0] * &t.mats[1]) * &x * (&t.mats[0] * &t.mats[1]).adjoint();
        assert!(frobenius(&(phi_apply(&f, &t, &x).unwrap() - brute)) < 1e-14);
    }

    #[test]
    fn membership_examples() {
        let fock = build_fock(&mixed(), 4).unwrap();
        assert!(membership(&mixed(), &OperatorTuple::model(&fock, 1)).unwrap().member);
        let big = OperatorTuple::new(vec![m2([2.0, 0.0, 0.0, 2.0])]).unwrap();
        assert!(!membership(&FreeSymbol::ball(1), &big).unwrap().member);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = random_tuple(&mut rng, 2, 3);
        let mut r = 1.0;
        while !membership(&mixed(), &t.scale(r)).unwrap().member {
            r *= 0.5;
        }
        assert!(membership(&mixed(), &t.scale(r)).unwrap().defect_min_eig >= 0.0);
    }

    #[test]
    fn classify_examples() {
        let fock = build_fock(&FreeSymbol::ball(2), 4).unwrap();
        let rep = classify(&FreeSymbol::ball(2), &OperatorTuple::model(&fock, 1).scale(0.7), 200).unwrap();
        assert!(rep.pure && rep.cnc);

        let (c, s) = (0.6, 0.8);
        let rot = OperatorTuple::new(vec![m2([c, -s, s, c])]).unwrap();
        let rep = classify(&FreeSymbol::ball(1), &rot, 200).unwrap();
        assert!(!rep.pure && !rep.cnc);
        assert!((rep.q_norm - 1.0).abs() < 1e-12);

        let diag = OperatorTuple::new(vec![m2([1.0, 0.0, 0.0, 0.5])]).unwrap();
        let rep = classify(&FreeSymbol::ball(1), &diag, 200).unwrap();
        assert!(!rep.pure && !rep.cnc);
        assert!((rep.q_max_eig - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_radius_examples() {
        let nil = OperatorTuple::new(vec![m2([0.0, 1.0, 0.0, 0.0])]).unwrap();
        let r = spectral_radius(&FreeSymbol::ball(1), &nil, 50).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.nilpotent);

        let lam = [C64::new(0.3, 0.4), C64::new(-0.2, 0.1)];
        let r = spectral_radius(&FreeSymbol::ball(2), &OperatorTuple::scalar(&lam), 20).unwrap();
        let expect = (lam[0].norm_sqr() + lam[1].norm_sqr()).sqrt();
        assert!((r.value - expect).abs() < 1e-14);

        let fock = build_fock(&FreeSymbol::ball(2), 3).unwrap();
        let r = spectral_radius(&FreeSymbol::ball(2), &OperatorTuple::model(&fock, 1), 50).unwrap();
        assert!(r.value < 1.0);
    }

    #[test]
    fn cauchy_routes_agree() {
        let f = mixed();
        let fock = build_fock(&f, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = scale_to_gauge(&f, &random_tuple(&mut rng, 2, 2), 0.6).unwrap();
        let a = cauchy_kernel(&f, &t, &fock).unwrap().op.to_dense();
        let b = cauchy_fourier(&f, &t, &fock).unwrap().to_dense();
        let c = cauchy_neumann(&f, &t, &fock).unwrap().to_dense();
        assert!(frobenius(&(&a - &b)) < 1e-12);
        assert!(frobenius(&(&a - &c)) < 1e-12);
        let dense_inv = (CMat::identity(a.nrows(), a.nrows())
            - reconstruction_operator(&f, &t, &fock).unwrap().to_dense())
        .try_inverse()
        .unwrap();
        assert!(frobenius(&(&a - dense_inv)) < 1e-10);
        assert!(linalg::spectral_norm(&a) <= cauchy_norm_bound(&f, &t, 400).unwrap());
    }

    #[test]
    fn cauchy_examples() {
        let f = FreeSymbol::ball(1);
        let fock = build_fock(&f, 5).unwrap();
        let z = cauchy_kernel(&f, &OperatorTuple::zeros(1, 1), &fock).unwrap().op.to_dense();
        assert_eq!(z, CMat::identity(6, 6));
        let t = C64::new(0.5, 0.2);
        let c = cauchy_kernel(&f, &OperatorTuple::scalar(&[t]), &fock).unwrap().op.to_dense();
        for r in 0..6 {
            for col in 0..=r {
                assert!((c[(r, col)] - t.conj().powi((r - col) as i32)).norm() < 1e-14);
            }
        }
        let unit = OperatorTuple::scalar(&[C64::new(1.5, 0.0)]);
        assert!(matches!(cauchy_kernel(&f, &unit, &fock), Err(Error::Precondition(_))));
    }

    #[test]
    fn reconstruction_is_nilpotent() {
        let f = mixed();
        let fock = build_fock(&f, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = random_tuple(&mut rng, 2, 2);
        let r = reconstruction_operator(&f, &t, &fock).unwrap();
        let mut p = r.clone();
        for _ in 0..fock.level() {
            p = p.mul(&r);
        }
        assert_eq!(p.nnz_blocks(), 0);
    }

    #[test]
    fn series_examples() {
        let f = FreeSymbol::ball(1);
        let t = OperatorTuple::scalar(&[C64::new(0.5, 0.0)]);
        let one: Coeffs = [(Word::empty(), ONE)].into_iter().collect();
        assert_eq!(series_calculus(&f, &t, &one, 10).unwrap().value[(0, 0)], ONE);
        let k = 40;
        let geo: Coeffs = (0..=k).map(|j| (Word::new(vec![0; j]), ONE)).collect();
        let v = series_calculus(&f, &t, &geo, k).unwrap().value[(0, 0)];
        assert!((v.re - 2.0).abs() <= 2f64.powi(-(k as i32)));

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let tt = random_tuple(&mut rng, 2, 3);
        let mono: Coeffs = [(w(&[1, 0, 1]), ONE)].into_iter().collect();
        let got = series_calculus(&mixed(), &tt, &mono, 10).unwrap().value;
        assert!(frobenius(&(got - &tt.mats[1] * &tt.mats[0] * &tt.mats[1])) < 1e-13);
    }

    #[test]
    fn cauchy_transform_identity() {
        let f = mixed();
        let fock = build_fock(&f, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = scale_to_gauge(&f, &random_tuple(&mut rng, 2, 3), 0.7).unwrap();
        let c: Coeffs = [(w(&[]), C64::new(0.3, 0.0)), (w(&[0, 1]), C64::new(0.0, 1.0)), (w(&[1, 1, 0]), ONE)]
            .into_iter()
            .collect();
        let x = CVec::from_fn(3, |i, _| C64::new(i as f64, 1.0)).normalize();
        let y = CVec::from_fn(3, |i, _| C64::new(1.0, -(i as f64))).normalize();
        assert!(cauchy_identity_residual(&f, &t, &fock, &c, &x, &y).unwrap() < 1e-12);
    }

    #[test]
    fn gauge_scaling_hits_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = scale_to_gauge(&mixed(), &random_tuple(&mut rng, 2, 4), 0.8).unwrap();
        assert!((gauge(&mixed(), &t).unwrap() - 0.8).abs() < 1e-12);
        let c = random_commuting_tuple(&mut rng, 2, 3);
        assert!(c.commutator_norm() < 1e-12);
    }

    #[test]
    fn shape_errors() {
        assert!(OperatorTuple::new(vec![CMat::zeros(2, 2), CMat::zeros(3, 3)]).is_err());
        assert!(OperatorTuple::new(vec![CMat::zeros(2, 3)]).is_err());
        let t = OperatorTuple::zeros(1, 2);
        assert!(phi_apply(&mixed(), &t, &CMat::zeros(2, 2)).is_err());
        assert!(phi_apply(&FreeSymbol::ball(1), &t, &CMat::zeros(3, 3)).is_err());
    }
}
