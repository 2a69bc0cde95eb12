//! Positive regular noncommutative polynomials and their `b`-coefficients.
//!
//! `b_α` are the Taylor coefficients of `(1 − f)^{-1}`; they are produced by
//! the prefix recursion `b_γ = Σ_{βα=γ, |β|≥1} a_β b_α` in graded order, so
//! every term is nonnegative and no cancellation occurs.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::linalg::C64;
use crate::words::{enumerate_words, suffix_splits, word_count, Word};
use crate::{Error, Result};

/// Polynomial coefficients keyed by word, ordered graded-lex.
pub type Coeffs = BTreeMap<Word, C64>;

#[derive(Clone, Debug, PartialEq)]
pub struct FreeSymbol {
    n: usize,
    a: BTreeMap<Word, f64>,
}

impl FreeSymbol {
    /// Validates and stores `f = Σ a_α X_α`. Zero coefficients are dropped.
    pub fn new(n: usize, coeffs: impl IntoIterator<Item = (Word, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("n", "need at least one generator"));
        }
        let mut a = BTreeMap::new();
        for (word, value) in coeffs {
            let bad = |reason: &str| Error::InvalidSymbol { word: word.clone(), reason: reason.into() };
            if !word.fits(n) {
                return Err(bad(&format!("letter out of range for n = {n}")));
            }
            if !value.is_finite() {
                return Err(bad("coefficient is not finite"));
            }
            if value < 0.0 {
                return Err(bad("coefficient is negative"));
            }
            if word.is_empty() && value != 0.0 {
                return Err(bad("constant term must be zero"));
            }
            if a.contains_key(&word) {
                return Err(bad("word listed twice"));
            }
            if value > 0.0 {
                a.insert(word, value);
            }
        }
        for i in 0..n {
            if !a.contains_key(&Word::letter(i)) {
                return Err(Error::InvalidSymbol {
                    word: Word::letter(i),
                    reason: "linear coefficient must be positive".into(),
                });
            }
        }
        Ok(FreeSymbol { n, a })
    }

    /// `a_1 X_1 + … + a_n X_n`
    pub fn linear(weights: &[f64]) -> Result<Self> {
        FreeSymbol::new(weights.len(), weights.iter().enumerate().map(|(i, &w)| (Word::letter(i), w)))
    }

    /// `X_1 + … + X_n`, the free ball.
    pub fn ball(n: usize) -> Self {
        FreeSymbol::linear(&vec![1.0; n]).expect("unit weights are valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support_degree(&self) -> usize {
        self.a.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn coeff(&self, w: &Word) -> f64 {
        self.a.get(w).copied().unwrap_or(0.0)
    }

    /// Support words with their coefficients, graded-lex order.
    pub fn support(&self) -> impl Iterator<Item = (&Word, f64)> {
        self.a.iter().map(|(w, &v)| (w, v))
    }

    pub fn support_len(&self) -> usize {
        self.a.len()
    }

    pub fn is_linear(&self) -> bool {
        self.support_degree() == 1
    }

    /// `Σ a_α λ_α \bar μ_α`
    pub fn pairing(&self, lambda: &[C64], mu: &[C64]) -> C64 {
        self.support().map(|(w, a)| w.eval_scalar(lambda) * w.eval_scalar(mu).conj() * a).sum()
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_vec(&self.to_json()).expect("symbol serializes");
        Sha256::digest(&canon).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_json(&self) -> SymbolJson {
        SymbolJson { n: self.n, coeffs: self.a.iter().map(|(w, &a)| CoeffJson { word: w.clone(), a }).collect() }
    }
}

#[derive(Clone, Debug, Serialize, serde::Deserialize)]
pub struct SymbolJson {
    pub n: usize,
    pub coeffs: Vec<CoeffJson>,
}

#[derive(Clone, Debug, Serialize, serde::Deserialize)]
pub struct CoeffJson {
    pub word: Word,
    pub a: f64,
}

impl TryFrom<SymbolJson> for FreeSymbol {
    type Error = Error;

    fn try_from(s: SymbolJson) -> Result<Self> {
        FreeSymbol::new(s.n, s.coeffs.into_iter().map(|c| (c.word, c.a)))
    }
}

/// `b_α` for every word of length `≤ degree`, stored by graded index.
#[derive(Clone, Debug, PartialEq)]
pub struct BTable {
    n: usize,
    degree: usize,
    values: Vec<f64>,
}

impl BTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn get(&self, w: &Word) -> f64 {
        assert!(w.len() <= self.degree, "word {w} beyond table degree {}", self.degree);
        self.values[w.graded_index(self.n)]
    }

    pub fn by_index(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Runs the prefix recursion up to degree `m`.
pub fn compute_b(f: &FreeSymbol, m: usize) -> BTable {
    let n = f.n;
    let total = word_count(n, m).expect("b-table size overflows usize");
    let mut values = vec![0.0; total];
    values[0] = 1.0;
    let support: Vec<(&Word, f64)> = f.support().collect();
    for idx in 1..total {
        let gamma = Word::from_graded_index(idx, n);
        let g = gamma.letters();
        let mut acc = 0.0;
        for &(beta, a) in &support {
            if beta.len() <= g.len() && g.starts_with(beta.letters()) {
                let rest = Word::new(g[beta.len()..].to_vec());
                acc += a * values[rest.graded_index(n)];
            }
        }
        values[idx] = acc;
    }
    BTable { n, degree: m, values }
}

/// Largest relative defect of the suffix identity `b_γ = Σ_{αβ=γ} a_β b_α`.
pub fn suffix_residual(f: &FreeSymbol, b: &BTable) -> f64 {
    let mut worst: f64 = 0.0;
    for gamma in enumerate_words(b.n, b.degree).into_iter().skip(1) {
        let s: f64 =
            suffix_splits(&gamma).expect("nonempty").iter().map(|(alpha, beta)| f.coeff(beta) * b.get(alpha)).sum();
        let bg = b.get(&gamma);
        worst = worst.max((bg - s).abs() / bg);
    }
    worst
}

/// Largest relative excess `(b_α b_β − b_{αβ}) / b_{αβ}` over stored pairs.
pub fn submultiplicativity_excess(b: &BTable) -> f64 {
    let words = enumerate_words(b.n, b.degree);
    let mut worst = f64::NEG_INFINITY;
    for alpha in &words {
        for beta in &words {
            if alpha.len() + beta.len() > b.degree {
                continue;
            }
            let ab = b.get(&alpha.concat(beta));
            worst = worst.max((b.get(alpha) * b.get(beta) - ab) / ab);
        }
    }
    worst
}

/// `γ = Σ_{α ∈ supp f} a_α / b_α`.
pub fn gamma_constant(f: &FreeSymbol, b: &BTable) -> Result<f64> {
    if b.degree < f.support_degree() {
        return Err(Error::input("b", "table does not cover the support of f"));
    }
    Ok(f.support().map(|(w, a)| a / b.get(w)).sum())
}

/// `max_{|α| ≤ m, i} sqrt(b_{g_i α} / b_α)`.
pub fn schwarz_constant(f: &FreeSymbol, b: &BTable, m: usize) -> Result<f64> {
    if b.degree < m + 1 {
        return Err(Error::input("b", "table must reach degree m + 1"));
    }
    let mut best: f64 = 0.0;
    for alpha in enumerate_words(f.n, m) {
        for i in 0..f.n {
            best = best.max((b.get(&alpha.prepend(i)) / b.get(&alpha)).sqrt());
        }
    }
    Ok(best)
}

/// `f̃`, coefficients indexed by reversed words.
pub fn reverse_symbol(f: &FreeSymbol) -> FreeSymbol {
    FreeSymbol { n: f.n, a: f.a.iter().map(|(w, &v)| (w.reverse(), v)).collect() }
}

pub const RADIUS_WINDOW: usize = 3;
pub const RADIUS_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct RadiusReport {
    /// `ρ_k` for `k = 1..=m`.
    pub rho: Vec<f64>,
    pub window: usize,
    pub trailing_max: f64,
    pub tolerance: f64,
    pub plausibly_holomorphic: bool,
}

/// Finite-data reading of `limsup_k (Σ_{|β|=k} |c_β|²/b_β)^{1/2k} ≤ 1`.
///
/// The flag only says the last few `ρ_k` stay below `1 + tolerance`.
pub fn radius_test(c: &Coeffs, b: &BTable, m: usize) -> Result<RadiusReport> {
    if m > b.degree {
        return Err(Error::input("m", "exceeds the b-table degree"));
    }
    let mut level = vec![0.0; m + 1];
    for (w, v) in c {
        if !w.fits(b.n) {
            return Err(Error::input("c", format!("word {w} has a letter out of range")));
        }
        if w.len() <= m {
            level[w.len()] += v.norm_sqr() / b.get(w);
        }
    }
    let rho: Vec<f64> = (1..=m).map(|k| level[k].powf(1.0 / (2.0 * k as f64))).collect();
    let window = RADIUS_WINDOW.min(rho.len());
    let trailing_max = rho[rho.len() - window..].iter().fold(0.0_f64, |a, &x| a.max(x));
    Ok(RadiusReport {
        rho,
        window,
        trailing_max,
        tolerance: RADIUS_TOL,
        plausibly_holomorphic: trailing_max <= 1.0 + RADIUS_TOL,
    })
}
