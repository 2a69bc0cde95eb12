//! Scalar points of `D_f(ℂ)`: eigenvectors `z_λ`, the reproducing kernel
//! `K_f`, the symmetric weighted Fock basis, Pick matrices, the
//! Schur–Carathéodory value and the corona lower bound.

use serde::Serialize;

use crate::fock::{FockVector, Side, TruncatedFock};
use crate::linalg::{self, CMat, CVec, C64, ONE, ZERO};
use crate::par;
use crate::symbol::{BTable, Coeffs, FreeSymbol};
pub use crate::words::monomial;
use crate::words::{degree_class, multidegrees, word_count};
use crate::{Error, Result};

pub const BOUNDARY_BAND: f64 = 1e-10;
pub const NODE_SEPARATION: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointClass {
    Interior,
    Boundary,
    Exterior,
}

#[derive(Clone, Debug, Serialize)]
pub struct DomainPoint {
    pub lambda: Vec<C64>,
    /// `Σ a_α |λ_α|²`
    pub gauge: f64,
    pub class: PointClass,
    pub band: f64,
}

pub fn point_in_domain(f: &FreeSymbol, lambda: &[C64]) -> Result<DomainPoint> {
    if lambda.len() != f.n() {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, symbol has n = {}",
            lambda.len(),
            f.n()
        )));
    }
    if lambda.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::input("lambda", "coordinates must be finite"));
    }
    let gauge = f.pairing(lambda, lambda).re;
    let class = if gauge < 1.0 - BOUNDARY_BAND {
        PointClass::Interior
    } else if gauge <= 1.0 + BOUNDARY_BAND {
        PointClass::Boundary
    } else {
        PointClass::Exterior
    };
    Ok(DomainPoint { lambda: lambda.to_vec(), gauge, class, band: BOUNDARY_BAND })
}

pub(crate) fn interior_point(f: &FreeSymbol, lambda: &[C64], field: &str) -> Result<DomainPoint> {
    let p = point_in_domain(f, lambda)?;
    if p.class != PointClass::Interior {
        return Err(Error::OutsideDomain(format!("{field} has gauge {} and is not interior", p.gauge)));
    }
    Ok(p)
}

/// `Σ_{|β| > k} b_β |λ_β|² ≤ g^J / (1 − g)` with `J = ⌈(k+1)/deg f⌉`.
pub fn geometric_tail(f: &FreeSymbol, gauge: f64, k: usize) -> f64 {
    let deg = f.support_degree().max(1);
    let j = (k + 1).div_ceil(deg);
    gauge.powi(j as i32) / (1.0 - gauge)
}

#[derive(Clone, Debug)]
pub struct ZVector {
    pub z: FockVector,
    pub norm_sq: f64,
    /// Closed form `1/(1 − gauge)`.
    pub full_norm_sq: f64,
    /// Bound on `Σ_{|β|>m} b_β |λ_β|²`.
    pub tail_bound: f64,
    /// `max_i ‖W_i* z − λ̄_i z‖ / ‖z‖`.
    pub eigen_residual: f64,
    /// Bound for `eigen_residual` from the tail past degree `m − 1`.
    pub eigen_bound: f64,
}

/// `z_λ = Σ_{|β| ≤ m} sqrt(b_β) \bar λ_β e_β`.
pub fn z_vector(fock: &TruncatedFock, lambda: &[C64]) -> Result<ZVector> {
    let f = fock.symbol();
    let p = interior_point(f, lambda, "lambda")?;
    let z = CVec::from_iterator(
        fock.dim(),
        fock.basis().iter().map(|beta| beta.eval_scalar(lambda).conj() * fock.b().get(beta).sqrt()),
    );
    let norm_sq = z.norm_squared();
    let mut eigen_residual: f64 = 0.0;
    for (i, lam) in lambda.iter().enumerate() {
        let r = fock.w(i).apply_adjoint(&z) - &z * lam.conj();
        eigen_residual = eigen_residual.max(r.norm() / norm_sq.sqrt());
    }
    let lam_max = lambda.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    let eigen_bound = lam_max * geometric_tail(f, p.gauge, fock.level() - 1).sqrt() / norm_sq.sqrt();
    Ok(ZVector {
        z,
        norm_sq,
        full_norm_sq: 1.0 / (1.0 - p.gauge),
        tail_bound: geometric_tail(f, p.gauge, fock.level()),
        eigen_residual,
        eigen_bound,
    })
}

/// `K_f(μ, λ) = 1 / (1 − Σ a_α μ_α \bar λ_α)`.
pub fn kernel_value(f: &FreeSymbol, mu: &[C64], lambda: &[C64]) -> Result<C64> {
    interior_point(f, mu, "mu")?;
    interior_point(f, lambda, "lambda")?;
    let s = ONE - f.pairing(mu, lambda);
    if s.norm() < 1e-14 {
        return Err(Error::Singular("1 − Σ a_α μ_α λ̄_α vanishes".into()));
    }
    Ok(ONE / s)
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelCheck {
    pub closed_form: C64,
    pub series: C64,
    pub difference: f64,
    pub bound: f64,
}

/// Compares `K_f(μ,λ)` with the truncated `⟨z_λ, z_μ⟩`; the bound is `sqrt(tail(μ) tail(λ))`.
pub fn kernel_check(fock: &TruncatedFock, mu: &[C64], lambda: &[C64]) -> Result<KernelCheck> {
    let f = fock.symbol();
    let closed = kernel_value(f, mu, lambda)?;
    let zl = z_vector(fock, lambda)?;
    let zm = z_vector(fock, mu)?;
    let series = zm.z.dotc(&zl.z);
    Ok(KernelCheck {
        closed_form: closed,
        series,
        difference: (closed - series).norm(),
        bound: (zl.tail_bound * zm.tail_bound).sqrt(),
    })
}

#[derive(Clone, Debug)]
pub struct SymmetricBasisEntry {
    pub k: Vec<usize>,
    pub gamma_k: f64,
    /// `(1/γ_k) Σ_{α ∈ class} sqrt(b_α) e_α` over words of length `≤ m`.
    pub w: FockVector,
}

pub fn symmetric_basis(b: &BTable, m: usize) -> Result<Vec<SymmetricBasisEntry>> {
    if m > b.degree() {
        return Err(Error::input("m", "exceeds the b-table degree"));
    }
    let n = b.n();
    let dim = word_count(n, m).ok_or(Error::DimensionCap { dim: usize::MAX, cap: crate::dim_cap() })?;
    let ks = multidegrees(n, m);
    Ok(par::map_slice(&ks, |k| {
        let class = degree_class(k);
        let gamma_k: f64 = class.members.iter().map(|a| b.get(a)).sum();
        let mut w = CVec::zeros(dim);
        for a in &class.members {
            w[a.graded_index(n)] = C64::new(b.get(a).sqrt() / gamma_k, 0.0);
        }
        SymmetricBasisEntry { k: k.clone(), gamma_k, w }
    }))
}

#[derive(Clone, Debug)]
pub struct PickProblem {
    pub nodes: Vec<Vec<C64>>,
    pub targets: Vec<CMat>,
}

impl PickProblem {
    pub fn validate(&self, f: &FreeSymbol) -> Result<usize> {
        if self.nodes.is_empty() {
            return Err(Error::input("nodes", "at least one node is required"));
        }
        if self.nodes.len() != self.targets.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} nodes but {} targets",
                self.nodes.len(),
                self.targets.len()
            )));
        }
        let q = self.targets[0].nrows();
        for (j, a) in self.targets.iter().enumerate() {
            if a.shape() != (q, q) {
                return Err(Error::DimensionMismatch(format!("target {j} is not {q}x{q}")));
            }
        }
        for (j, node) in self.nodes.iter().enumerate() {
            interior_point(f, node, &format!("nodes[{j}]"))?;
            for (k, other) in self.nodes[..j].iter().enumerate() {
                let dist: f64 = node.iter().zip(other).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
                if dist <= NODE_SEPARATION {
                    return Err(Error::input("nodes", format!("nodes {k} and {j} are closer than {NODE_SEPARATION}")));
                }
            }
        }
        Ok(q)
    }
}

#[derive(Clone, Debug)]
pub struct PickMatrix {
    pub matrix: CMat,
    pub asymmetry: f64,
}

/// Blocks `(I − A_i A_j*) K_f(λ_i, λ_j)`, symmetrized.
pub fn pick_matrix(f: &FreeSymbol, p: &PickProblem) -> Result<PickMatrix> {
    let q = p.validate(f)?;
    let k = p.nodes.len();
    let id = CMat::identity(q, q);
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect();
    let blocks = par::map_slice(&pairs, |&(i, j)| {
        let kv = kernel_value(f, &p.nodes[i], &p.nodes[j])?;
        Ok((&id - &p.targets[i] * p.targets[j].adjoint()) * kv)
    });
    let mut raw = CMat::zeros(k * q, k * q);
    for (&(i, j), blk) in pairs.iter().zip(blocks) {
        let blk: CMat = blk?;
        raw.view_mut((i * q, j * q), (q, q)).copy_from(&blk);
    }
    let asymmetry = linalg::max_abs(&(&raw - raw.adjoint()));
    Ok(PickMatrix { matrix: linalg::hermitian_part(&raw), asymmetry })
}

#[derive(Clone, Debug, Serialize)]
pub struct PickVerdict {
    pub feasible: bool,
    pub min_eig: f64,
    pub tolerance: f64,
}

/// Feasible iff `λ_min ≥ −1e-9 (1 + trace)/size`.
pub fn pick_feasible(f: &FreeSymbol, p: &PickProblem) -> Result<(PickVerdict, PickMatrix)> {
    let pm = pick_matrix(f, p)?;
    let size = pm.matrix.nrows() as f64;
    let tolerance = 1e-9 * (1.0 + linalg::trace_re(&pm.matrix)) / size;
    let min_eig = linalg::min_eigenvalue(&pm.matrix);
    Ok((PickVerdict { feasible: min_eig >= -tolerance, min_eig, tolerance }, pm))
}

/// `‖P_{≤m_sc} p(Λ)|_{≤m_sc}‖` with `p(Λ) = Σ c_{β̃} Λ_β`.
pub fn schur_caratheodory_value(fock: &TruncatedFock, c: &Coeffs, m_sc: usize) -> Result<f64> {
    if c.keys().any(|w| w.len() > m_sc) {
        return Err(Error::input("coeffs", "coefficient degree exceeds m_sc"));
    }
    let a = fock.eval_poly(Side::Right, c)?;
    fock.interior_norm(&a, m_sc)
}

/// `λ_min` of the compression to degrees `≤ d` of `Σ φ_i(W) φ_i(W)*`.
pub fn corona_delta(fock: &TruncatedFock, phis: &[Coeffs], d: usize) -> Result<f64> {
    if phis.is_empty() {
        return Err(Error::input("phi", "at least one function is required"));
    }
    if d > fock.level() {
        return Err(Error::input("d", "degree exceeds the level"));
    }
    let parts = par::map_slice(phis, |c| fock.eval_poly(Side::Left, c).map(|a| &a * a.adjoint()));
    let mut sum = CMat::zeros(fock.dim(), fock.dim());
    for p in parts {
        sum += p?;
    }
    let k = fock.dim_upto(d);
    Ok(linalg::min_eigenvalue(&sum.view((0, 0), (k, k)).into_owned()))
}

/// Rayleigh quotient of `Σ_i (λ_i − W_i)(λ̄_i − W_i*)` at `z_λ`.
pub fn right_spectrum_witness(fock: &TruncatedFock, lambda: &[C64]) -> Result<f64> {
    let z = z_vector(fock, lambda)?.z;
    let mut acc = 0.0;
    for (i, lam) in lambda.iter().enumerate() {
        let v = fock.w(i).apply_adjoint(&z) - &z * lam.conj();
        acc += v.norm_squared();
    }
    Ok(acc / z.norm_squared())
}

/// Scalar value `φ(λ) = Σ c_β λ_β`.
pub fn eval_scalar(c: &Coeffs, lambda: &[C64]) -> C64 {
    c.iter().map(|(w, v)| v * w.eval_scalar(lambda)).fold(ZERO, |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::build_fock;
    use crate::symbol::compute_b;
    use crate::words::enumerate_words;
    use crate::words::Word;

    fn w(v: &[usize]) -> Word {
        Word::new(v.to_vec())
    }

    fn cr(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn mixed() -> FreeSymbol {
        FreeSymbol::new(2, [(w(&[0]), 1.0), (w(&[1]), 1.0), (w(&[0, 1]), 1.0)]).unwrap()
    }

    #[test]
    fn point_examples() {
        let p = point_in_domain(&mixed(), &[ZERO, ZERO]).unwrap();
        assert_eq!((p.gauge, p.class), (0.0, PointClass::Interior));
        let p = point_in_domain(&FreeSymbol::ball(2), &[ONE, ZERO]).unwrap();
        assert_eq!((p.gauge, p.class), (1.0, PointClass::Boundary));
        let p = point_in_domain(&mixed(), &[cr(0.5), cr(0.5)]).unwrap();
        assert!((p.gauge - 0.5625).abs() < 1e-15);
        assert_eq!(p.class, PointClass::Interior);
        assert!(point_in_domain(&mixed(), &[ONE]).is_err());
    }

    #[test]
    fn z_vector_examples() {
        let fock = build_fock(&mixed(), 5).unwrap();
        let z = z_vector(&fock, &[ZERO, ZERO]).unwrap();
        assert_eq!(z.z, fock.vacuum());
        assert_eq!(z.norm_sq, 1.0);

        let shift = build_fock(&FreeSymbol::ball(1), 30).unwrap();
        let z = z_vector(&shift, &[cr(0.5)]).unwrap();
        for k in 0..=30 {
            assert!((z.z[k].re - 0.5f64.powi(k as i32)).abs() < 1e-16);
        }
        assert!((z.norm_sq - 4.0 / 3.0).abs() < 1e-15);
        assert!(z.full_norm_sq - z.norm_sq <= z.tail_bound + 1e-15);

        let lam = [C64::new(0.3, 0.2), C64::new(-0.1, 0.4)];
        let z = z_vector(&fock, &lam).unwrap();
        assert!(z.eigen_residual <= z.eigen_bound);
        assert!(z.full_norm_sq - z.norm_sq <= z.tail_bound);
        assert!(z_vector(&fock, &[ONE, ZERO]).is_err());
    }

    #[test]
    fn kernel_examples() {
        let f = FreeSymbol::ball(2);
        assert_eq!(kernel_value(&f, &[ZERO, ZERO], &[ZERO, ZERO]).unwrap(), ONE);
        let half = [cr(0.5), ZERO];
        assert!((kernel_value(&f, &half, &half).unwrap() - cr(4.0 / 3.0)).norm() < 1e-15);
        let fock = build_fock(&f, 12).unwrap();
        let chk = kernel_check(&fock, &half, &half).unwrap();
        assert!(chk.difference <= chk.bound);

        let g = mixed();
        let mu = [C64::new(0.2, -0.3), C64::new(0.1, 0.25)];
        let la = [C64::new(-0.35, 0.1), C64::new(0.2, 0.2)];
        let a = kernel_value(&g, &mu, &la).unwrap();
        let b = kernel_value(&g, &la, &mu).unwrap();
        assert!((a - b.conj()).norm() < 1e-15);
    }

    #[test]
    fn symmetric_basis_examples() {
        let b = compute_b(&FreeSymbol::ball(2), 4);
        let basis = symmetric_basis(&b, 4).unwrap();
        let e11 = basis.iter().find(|e| e.k == vec![1, 1]).unwrap();
        assert_eq!(e11.gamma_k, 2.0);
        assert_eq!(e11.w[w(&[0, 1]).graded_index(2)], cr(0.5));
        assert_eq!(e11.w[w(&[1, 0]).graded_index(2)], cr(0.5));
        let e0 = &basis[0];
        assert_eq!((e0.k.clone(), e0.gamma_k), (vec![0, 0], 1.0));
        assert_eq!(e0.w[0], ONE);
        for e in &basis {
            assert!((e.w.norm() - 1.0 / e.gamma_k.sqrt()).abs() < 1e-14);
        }
        for (i, a) in basis.iter().enumerate() {
            for c in &basis[i + 1..] {
                assert_eq!(a.w.dotc(&c.w), ZERO);
            }
        }
    }

    #[test]
    fn symmetric_basis_reproduces_z() {
        let f = mixed();
        let fock = build_fock(&f, 5).unwrap();
        let basis = symmetric_basis(fock.b(), 5).unwrap();
        let lam = [C64::new(0.3, -0.2), C64::new(0.25, 0.1)];
        let z = z_vector(&fock, &lam).unwrap().z;
        let mut rebuilt = CVec::zeros(fock.dim());
        for e in &basis {
            let mono = monomial(&e.k, &lam);
            assert!((e.w.dotc(&z).conj() - mono).norm() < 1e-14 || (z.dotc(&e.w) - mono).norm() < 1e-14);
            rebuilt += &e.w * (mono.conj() * e.gamma_k);
        }
        assert!((rebuilt - z).norm() < 1e-12);
    }

    #[test]
    fn pick_examples() {
        let f = FreeSymbol::ball(1);
        let one = |x: f64| CMat::from_element(1, 1, cr(x));
        let p = PickProblem { nodes: vec![vec![cr(0.3)]], targets: vec![one(0.0)] };
        let (v, _) = pick_feasible(&f, &p).unwrap();
        assert!(v.feasible && v.min_eig > 0.0);

        let p = PickProblem { nodes: vec![vec![ZERO], vec![cr(0.5)]], targets: vec![one(0.0), one(0.5)] };
        let (v, pm) = pick_feasible(&f, &p).unwrap();
        assert!((&pm.matrix - CMat::from_element(2, 2, ONE)).norm() < 1e-14);
        assert!(v.feasible && v.min_eig.abs() < 1e-12);

        let p = PickProblem { nodes: vec![vec![ZERO], vec![cr(0.5)]], targets: vec![one(0.0), one(0.9)] };
        let (v, _) = pick_feasible(&f, &p).unwrap();
        assert!(!v.feasible && v.min_eig < -0.1);

        let dup = PickProblem { nodes: vec![vec![ZERO], vec![ZERO]], targets: vec![one(0.0), one(0.0)] };
        assert!(pick_feasible(&f, &dup).is_err());
    }

    #[test]
    fn schur_caratheodory_examples() {
        let fock = build_fock(&FreeSymbol::ball(1), 5).unwrap();
        let id: Coeffs = [(Word::empty(), ONE)].into_iter().collect();
        assert!((schur_caratheodory_value(&fock, &id, 3).unwrap() - 1.0).abs() < 1e-14);
        let lam: Coeffs = [(w(&[0]), ONE)].into_iter().collect();
        assert!((schur_caratheodory_value(&fock, &lam, 3).unwrap() - 1.0).abs() < 1e-14);
        let two: Coeffs = [(w(&[0]), cr(2.0))].into_iter().collect();
        assert!((schur_caratheodory_value(&fock, &two, 3).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn corona_examples() {
        let fock = build_fock(&FreeSymbol::ball(1), 5).unwrap();
        let one: Coeffs = [(Word::empty(), ONE)].into_iter().collect();
        assert!((corona_delta(&fock, &[one], 5).unwrap() - 1.0).abs() < 1e-14);
        let s: Coeffs = [(w(&[0]), ONE)].into_iter().collect();
        assert!(corona_delta(&fock, std::slice::from_ref(&s), 5).unwrap().abs() < 1e-14);
        let t: Coeffs = [(Word::empty(), ONE), (w(&[0]), -ONE)].into_iter().collect();
        assert!(corona_delta(&fock, &[s, t], 5).unwrap() > 1e-3);
    }

    #[test]
    fn multiplier_eigenvector_identity() {
        let f = mixed();
        let fock = build_fock(&f, 9).unwrap();
        let lam = [C64::new(0.2, 0.1), C64::new(-0.15, 0.2)];
        let phi: Coeffs =
            [(w(&[]), cr(0.5)), (w(&[1, 0]), C64::new(0.0, 2.0)), (w(&[0]), cr(-1.0))].into_iter().collect();
        let zv = z_vector(&fock, &lam).unwrap();
        let a = fock.eval_poly(Side::Left, &phi).unwrap();
        let lhs = a.adjoint() * &zv.z;
        let rhs = &zv.z * eval_scalar(&phi, &lam).conj();
        let k = fock.dim_upto(fock.level() - 2);
        assert!((lhs - rhs).rows(0, k).norm() < 1e-13);
    }

    #[test]
    fn right_spectrum_witness_decreases() {
        let f = mixed();
        let lam = [cr(0.3), cr(0.3)];
        let vals: Vec<f64> =
            [4, 6, 8].iter().map(|&m| right_spectrum_witness(&build_fock(&f, m).unwrap(), &lam).unwrap()).collect();
        assert!(vals[0] > vals[1] && vals[1] > vals[2]);
        assert!(vals[2] < 1e-3);
    }

    #[test]
    fn class_words_share_evaluation() {
        let lam = [C64::new(0.3, 0.1), C64::new(-0.2, 0.7), cr(0.4)];
        for k in multidegrees(3, 4) {
            let class = degree_class(&k);
            for a in &class.members {
                assert!((a.eval_scalar(&lam) - monomial(&k, &lam)).norm() < 1e-15);
            }
        }
        assert_eq!(enumerate_words(3, 0), vec![Word::empty()]);
    }
}
