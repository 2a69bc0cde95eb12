//! Characteristic functions and curvature invariants of domain tuples.
//!
//! The row operator is `C(T) = [sqrt(a_σ) T_σ : σ ∈ supp f]`, so that
//! `C(T) C(T)* = Φ(I)`; its column slots are ordered by the lexicographic
//! order of the reversed words `σ̃`. Defect operators and projections stay
//! in full coordinates: [`char_point`] returns `Θ(z) P_{C*}` as a
//! `d × dN` matrix and [`char_operator`] the matching multi-analytic
//! operator on `Fock ⊗ ℂ^{dN} → Fock ⊗ ℂ^d`.

use serde::Serialize;

use crate::blockop::BlockOp;
use crate::fock::TruncatedFock;
use crate::kernel::{interior_point, z_vector};
use crate::linalg::{self, CMat, C64, ONE};
use crate::poisson::{build_poisson, RANK_CUT};
use crate::symbol::{compute_b, gamma_constant, FreeSymbol};
use crate::tuples::{cauchy_solve, classify, membership, OperatorTuple, PhiMap, DEFAULT_KMAX};
use crate::words::Word;
use crate::{Error, Result};

pub const PLATEAU_WINDOW: usize = 5;
pub const PLATEAU_REL: f64 = 1e-3;
pub const BRANCH_BAND: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct CharData {
    /// Support words `σ`, one per column slot.
    pub slots: Vec<Word>,
    pub c: CMat,
    pub delta_c: CMat,
    pub delta_cstar: CMat,
    pub p_c: CMat,
    pub p_cstar: CMat,
    pub rank_c: usize,
    pub rank_cstar: usize,
    /// `‖Δ_C C − C Δ_{C*}‖`.
    pub intertwining: f64,
}

impl CharData {
    pub fn d(&self) -> usize {
        self.c.nrows()
    }

    pub fn slots_len(&self) -> usize {
        self.slots.len()
    }
}

pub fn char_data(f: &FreeSymbol, t: &OperatorTuple) -> Result<CharData> {
    let mem = membership(f, t)?;
    if !mem.member {
        return Err(Error::Precondition(format!(
            "tuple is not in the domain (λ_min(I − Φ(I)) = {:e})",
            mem.defect_min_eig
        )));
    }
    let mut slots: Vec<(Word, f64)> = f.support().map(|(w, a)| (w.clone(), a)).collect();
    slots.sort_by_cached_key(|x| x.0.reverse());
    let d = t.d();
    let nn = slots.len();
    let mut c = CMat::zeros(d, d * nn);
    for (k, (w, a)) in slots.iter().enumerate() {
        c.view_mut((0, k * d), (d, d)).copy_from(&t.word(w).scale(a.sqrt()));
    }
    let dc2 = CMat::identity(d, d) - &c * c.adjoint();
    let dcs2 = CMat::identity(d * nn, d * nn) - c.adjoint() * &c;
    let delta_c = linalg::psd_sqrt(&dc2);
    let delta_cstar = linalg::psd_sqrt(&dcs2);
    let (p_c, rank_c) = linalg::range_projection(&delta_c, RANK_CUT);
    let (p_cstar, rank_cstar) = linalg::range_projection(&delta_cstar, RANK_CUT);
    let intertwining = linalg::spectral_norm(&(&delta_c * &c - &c * &delta_cstar));
    Ok(CharData {
        slots: slots.into_iter().map(|(w, _)| w).collect(),
        c,
        delta_c,
        delta_cstar,
        p_c,
        p_cstar,
        rank_c,
        rank_cstar,
        intertwining,
    })
}

#[derive(Clone, Debug)]
pub struct CharPoint {
    /// `Θ(z) P_{C*}`, `d × dN`.
    pub theta: CMat,
    pub norm: f64,
    /// `‖(P_C − ΘΘ*) − (1 − Σ a|z_σ|²) Δ_C R R* Δ_C‖` with `R = (I − Σ a_σ z_σ T_σ*)^{-1}`.
    pub factor_residual: f64,
    pub gauge: f64,
}

/// `Θ(z) = −C + Δ_C (I − Σ a_σ z_σ T_σ*)^{-1} [sqrt(a_σ) z_σ I]_σ Δ_{C*}` on `𝒟_{C*}`.
pub fn char_point(f: &FreeSymbol, t: &OperatorTuple, z: &[C64]) -> Result<CharPoint> {
    let data = char_data(f, t)?;
    char_point_with(f, t, &data, z)
}

pub fn char_point_with(f: &FreeSymbol, t: &OperatorTuple, data: &CharData, z: &[C64]) -> Result<CharPoint> {
    let p = interior_point(f, z, "z")?;
    let d = t.d();
    let nn = data.slots_len();
    let mut row = CMat::zeros(d, d * nn);
    let mut res = CMat::identity(d, d);
    for (k, w) in data.slots.iter().enumerate() {
        let a = f.coeff(w);
        let zw = w.eval_scalar(z);
        row.view_mut((0, k * d), (d, d)).copy_from(&CMat::identity(d, d).scale(a.sqrt()).map(|x| x * zw));
        res -= t.word(w).adjoint() * (zw * a);
    }
    let svals = res.clone().svd(false, false).singular_values;
    let smin = svals.iter().copied().fold(f64::INFINITY, f64::min);
    let r = res
        .try_inverse()
        .filter(|_| smin > 1e-14)
        .ok_or_else(|| Error::Singular(format!("I − Σ a_σ z_σ T_σ* is singular at z = {z:?}")))?;
    let raw = -&data.c + &data.delta_c * &r * row * &data.delta_cstar;
    let theta = raw * &data.p_cstar;
    let lhs = &data.p_c - &theta * theta.adjoint();
    let rhs = (&data.delta_c * &r * r.adjoint() * &data.delta_c).scale(1.0 - p.gauge);
    Ok(CharPoint {
        norm: linalg::spectral_norm(&theta),
        factor_residual: linalg::spectral_norm(&(lhs - rhs)),
        theta,
        gauge: p.gauge,
    })
}

#[derive(Clone, Debug)]
pub struct CharOperator {
    /// Block `(δ, γ)` is `d × dN`.
    pub theta: BlockOp,
    pub data: CharData,
}

/// Multi-analytic `Θ` on `Fock_m ⊗ ℂ^{dN} → Fock_m ⊗ ℂ^d`.
pub fn char_operator(f: &FreeSymbol, t: &OperatorTuple, fock: &TruncatedFock) -> Result<CharOperator> {
    let data = char_data(f, t)?;
    let d = t.d();
    let nn = data.slots_len();
    let dim = fock.dim();
    let cauchy = cauchy_solve(f, t, fock)?;
    let mut zop = BlockOp::zeros(dim, dim, d, d * nn);
    for (k, sigma) in data.slots.iter().enumerate() {
        let a = f.coeff(sigma);
        for gamma in fock.basis() {
            if gamma.len() + sigma.len() > fock.level() {
                continue;
            }
            let img = gamma.concat(sigma);
            let wgt = a.sqrt() * (fock.b().get(gamma) / fock.b().get(&img)).sqrt();
            let mut blk = CMat::zeros(d, d * nn);
            for j in 0..d {
                blk[(j, k * d + j)] = C64::new(wgt, 0.0);
            }
            zop.add_block(fock.index(&img), fock.index(gamma), &blk);
        }
    }
    let right = &data.delta_cstar * &data.p_cstar;
    let series = cauchy.mul(&zop).mul_right_blocks(&right).mul_left_blocks(&data.delta_c);
    let theta = series.sub(&BlockOp::diag(dim, &(&data.c * &data.p_cstar)));
    Ok(CharOperator { theta, data })
}

/// `max_i ‖Θ(W_i ⊗ I) − (W_i ⊗ I)Θ‖_F` on degrees `≤ m − 1`.
pub fn multi_analytic_residual(op: &CharOperator, fock: &TruncatedFock) -> f64 {
    let d = op.data.d();
    let q = d * op.data.slots_len();
    let k = fock.dim_upto(fock.level() - 1);
    let mut worst: f64 = 0.0;
    for i in 0..fock.n() {
        let a = op.theta.mul(&BlockOp::from_monomial(fock.w(i), q));
        let b = BlockOp::from_monomial(fock.w(i), d).mul(&op.theta);
        worst = worst.max(linalg::frobenius(&a.sub(&b).leading(k).to_dense()));
    }
    worst
}

/// `(z_λ* ⊗ I) Θ (e_ε ⊗ I) = Σ_σ sqrt(b_σ) λ_σ Θ[σ, ε]`.
pub fn char_operator_point(op: &CharOperator, fock: &TruncatedFock, lambda: &[C64]) -> Result<CMat> {
    let zv = z_vector(fock, lambda)?;
    let (p, q) = op.theta.block_shape();
    let mut out = CMat::zeros(p, q);
    for (r, w) in fock.basis().iter().enumerate() {
        if let Some(blk) = op.theta.block(r, 0) {
            out += blk * zv.z[r].conj();
        }
        let _ = w;
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorReport {
    /// `‖(I ⊗ P_C) − ΘΘ* − KK*‖_F` on degrees `≤ interior_degree`.
    pub residual: f64,
    pub interior_degree: usize,
    pub theta_norm_bound: f64,
    pub rank_c: usize,
    pub rank_cstar: usize,
}

pub fn factorization_residual(f: &FreeSymbol, t: &OperatorTuple, fock: &TruncatedFock) -> Result<FactorReport> {
    let op = char_operator(f, t, fock)?;
    let p = build_poisson(f, t, fock)?;
    let d = t.d();
    let interior = fock.level();
    let rows = fock.dim_upto(interior) * d;
    let tt = op.theta.mul(&op.theta.adjoint()).to_dense();
    let pc = linalg::identity_kron(fock.dim(), &op.data.p_c);
    let kk = &p.k * p.k.adjoint();
    let diff = (pc - &tt - kk).view((0, 0), (rows, rows)).into_owned();
    let theta_norm_bound = linalg::max_eigenvalue(&tt).max(0.0).sqrt();
    Ok(FactorReport {
        residual: linalg::frobenius(&diff),
        interior_degree: interior,
        theta_norm_bound,
        rank_c: op.data.rank_c,
        rank_cstar: op.data.rank_cstar,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Above,
    Unit,
    Below,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurvatureKind {
    Curvature,
    Star,
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchSeries {
    pub branch: Branch,
    pub ratios: Vec<f64>,
    pub value: f64,
    pub spread: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureTrace {
    pub kind: CurvatureKind,
    /// `γ` for the curvature, `‖Φ*(I)‖` for the *-curvature.
    pub base: f64,
    /// `trace(I − Φ^k(I))`, `k = 1..=k_max`.
    pub numerators: Vec<f64>,
    pub primary: BranchSeries,
    /// Second branch, present when `base` is within the band around 1.
    pub adjacent: Option<BranchSeries>,
    pub trace_defect: f64,
    pub defect_rank: usize,
    /// Every ratio is `≤ trace(I − Φ(I)) ≤ rank(I − Φ(I))`.
    pub bound_ok: bool,
    pub warnings: Vec<String>,
}

impl CurvatureTrace {
    pub fn value(&self) -> f64 {
        self.primary.value
    }
}

fn plateau(branch: Branch, ratios: Vec<f64>) -> BranchSeries {
    let n = ratios.len();
    let value = ratios.last().copied().unwrap_or(0.0);
    if n < PLATEAU_WINDOW {
        return BranchSeries { branch, ratios, value, spread: f64::INFINITY, converged: false };
    }
    let tail = &ratios[n - PLATEAU_WINDOW..];
    let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    let mean = tail.iter().sum::<f64>() / PLATEAU_WINDOW as f64;
    let spread = hi - lo;
    let converged = spread < PLATEAU_REL * mean.abs().max(1.0);
    BranchSeries { branch, ratios, value, spread, converged }
}

struct Traces {
    numerators: Vec<f64>,
    defect_iterates: Vec<f64>,
    trace_defect: f64,
    defect_rank: usize,
}

fn traces(phi: &PhiMap, k_max: usize) -> Traces {
    let d = phi.dim();
    let id = CMat::identity(d, d);
    let delta_sq = linalg::hermitian_part(&(&id - phi.apply(&id)));
    let mut x = id.clone();
    let mut y = delta_sq.clone();
    let mut numerators = Vec::with_capacity(k_max);
    let mut defect_iterates = Vec::with_capacity(k_max);
    for _ in 0..k_max {
        x = phi.apply(&x);
        numerators.push(d as f64 - linalg::trace_re(&x));
        y = phi.apply(&y);
        defect_iterates.push(linalg::trace_re(&y));
    }
    Traces {
        numerators,
        defect_iterates,
        trace_defect: linalg::trace_re(&delta_sq),
        defect_rank: linalg::psd_rank(&delta_sq, RANK_CUT),
    }
}

fn geometric_ratios(nums: &[f64], base: f64) -> Vec<f64> {
    let mut denom = 0.0;
    let mut pow = 1.0;
    nums.iter()
        .map(|&num| {
            denom += pow;
            pow *= base;
            num / denom
        })
        .collect()
}

fn check_polynomial_member(f: &FreeSymbol, t: &OperatorTuple, k_max: usize) -> Result<()> {
    if k_max == 0 {
        return Err(Error::input("kmax", "must be at least 1"));
    }
    let mem = membership(f, t)?;
    if !mem.member {
        return Err(Error::Precondition(format!(
            "tuple is not in the domain (λ_min(I − Φ(I)) = {:e})",
            mem.defect_min_eig
        )));
    }
    Ok(())
}

fn finish(
    kind: CurvatureKind,
    base: f64,
    tr: Traces,
    primary: BranchSeries,
    adjacent: Option<BranchSeries>,
) -> CurvatureTrace {
    let mut warnings = Vec::new();
    if !primary.converged {
        warnings.push(format!("ratios did not plateau (spread {:e} over the last {PLATEAU_WINDOW})", primary.spread));
    }
    let top = primary.ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bound_ok = top <= tr.trace_defect * (1.0 + 1e-12) + 1e-12 && tr.trace_defect <= tr.defect_rank as f64 + 1e-9;
    CurvatureTrace {
        kind,
        base,
        numerators: tr.numerators,
        primary,
        adjacent,
        trace_defect: tr.trace_defect,
        defect_rank: tr.defect_rank,
        bound_ok,
        warnings,
    }
}

/// Curvature with `γ = Σ a_α / b_α`; the `γ = 1` branch uses `trace Φ^k(I − Φ(I))`.
pub fn curvature(p: &FreeSymbol, t: &OperatorTuple, k_max: usize) -> Result<CurvatureTrace> {
    check_polynomial_member(p, t, k_max)?;
    let gamma = gamma_constant(p, &compute_b(p, p.support_degree()))?;
    let phi = PhiMap::new(p, t)?;
    let tr = traces(&phi, k_max);
    let above = plateau(Branch::Above, geometric_ratios(&tr.numerators, gamma));
    let (primary, adjacent) = if (gamma - 1.0).abs() <= BRANCH_BAND {
        (plateau(Branch::Unit, tr.defect_iterates.clone()), Some(above))
    } else {
        (above, None)
    };
    Ok(finish(CurvatureKind::Curvature, gamma, tr, primary, adjacent))
}

/// *-curvature with `s = ‖Φ*(I)‖`, three branches around `s = 1`.
pub fn star_curvature(p: &FreeSymbol, t: &OperatorTuple, k_max: usize) -> Result<CurvatureTrace> {
    check_polynomial_member(p, t, k_max)?;
    let phi = PhiMap::new(p, t)?;
    let d = t.d();
    let s = linalg::max_eigenvalue(&phi.apply_adjoint(&CMat::identity(d, d))).max(0.0);
    let tr = traces(&phi, k_max);
    let above = || plateau(Branch::Above, geometric_ratios(&tr.numerators, s));
    let below = || plateau(Branch::Below, tr.numerators.iter().map(|x| (1.0 - s) * x).collect());
    let unit = || plateau(Branch::Unit, tr.defect_iterates.clone());
    let (primary, adjacent) = if (s - 1.0).abs() <= BRANCH_BAND {
        (unit(), Some(if s >= 1.0 { above() } else { below() }))
    } else if s > 1.0 {
        (above(), None)
    } else {
        (below(), None)
    };
    Ok(finish(CurvatureKind::Star, s, tr, primary, adjacent))
}

#[derive(Clone, Debug, Serialize)]
pub struct EllipsoidReport {
    pub curvature: CurvatureTrace,
    pub star_curvature: CurvatureTrace,
    pub defect_rank: usize,
    pub pure: bool,
    pub model_candidate: bool,
}

/// Curvature data for `p_e = Σ a_i X_i` and the model-tuple indicator.
pub fn ellipsoid_report(a: &[f64], t: &OperatorTuple, k_max: usize) -> Result<EllipsoidReport> {
    let p = FreeSymbol::linear(a)?;
    let curv = curvature(&p, t, k_max)?;
    let star = star_curvature(&p, t, k_max)?;
    let pure = classify(&p, t, DEFAULT_KMAX.max(k_max))?.pure;
    let defect_rank = curv.defect_rank;
    let model_candidate = pure && (curv.value() - defect_rank as f64).abs() <= 1e-3;
    Ok(EllipsoidReport { curvature: curv, star_curvature: star, defect_rank, pure, model_candidate })
}

/// `(trace Φ(X), ‖Φ*(I)‖ trace X, γ trace X)` for the trace-inequality chain.
pub fn trace_chain(f: &FreeSymbol, t: &OperatorTuple, x: &CMat) -> Result<(f64, f64, f64)> {
    let phi = PhiMap::new(f, t)?;
    let gamma = gamma_constant(f, &compute_b(f, f.support_degree()))?;
    let s = linalg::max_eigenvalue(&phi.apply_adjoint(&CMat::identity(t.d(), t.d())));
    let tx = linalg::trace_re(x);
    Ok((linalg::trace_re(&phi.apply(x)), s * tx, gamma * tx))
}

/// Möbius value `(z − t)/(1 − t z)` for scalar `t`.
pub fn mobius(t: f64, z: C64) -> C64 {
    (z - t) / (ONE - z * t)
}
