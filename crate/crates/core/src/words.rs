//! Free-semigroup combinatorics.
//!
//! A [`Word`] is a finite sequence of 0-based generator indices; the empty
//! word is the identity. Every matrix in the crate uses the graded
//! lexicographic basis order (by length, then lexicographically by letter),
//! and [`Word::graded_index`] computes a word's position in that order
//! without a lookup table.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::{C64, ONE};
use crate::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: impl Into<Vec<usize>>) -> Self {
        Word(letters.into())
    }

    pub fn letter(i: usize) -> Self {
        Word(vec![i])
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when every letter is below `n`.
    pub fn fits(&self, n: usize) -> bool {
        self.0.iter().all(|&l| l < n)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// `g_i · self`
    pub fn prepend(&self, i: usize) -> Word {
        let mut v = Vec::with_capacity(self.len() + 1);
        v.push(i);
        v.extend_from_slice(&self.0);
        Word(v)
    }

    /// `self · g_i`
    pub fn append(&self, i: usize) -> Word {
        let mut v = self.0.clone();
        v.push(i);
        Word(v)
    }

    pub fn reverse(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// Letter counts, i.e. the commutative multidegree.
    pub fn histogram(&self, n: usize) -> Vec<usize> {
        let mut h = vec![0; n];
        for &l in &self.0 {
            h[l] += 1;
        }
        h
    }

    /// Position of the word in the graded-lex enumeration over `n` letters.
    pub fn graded_index(&self, n: usize) -> usize {
        let k = self.len();
        let offset = level_offset(n, k);
        let within = self.0.iter().fold(0usize, |acc, &l| acc * n + l);
        offset + within
    }

    /// Inverse of [`Word::graded_index`].
    pub fn from_graded_index(mut idx: usize, n: usize) -> Word {
        let mut len = 0;
        let mut size = 1usize;
        while idx >= size {
            idx -= size;
            len += 1;
            size *= n;
        }
        let mut letters = vec![0; len];
        for slot in letters.iter_mut().rev() {
            *slot = idx % n;
            idx /= n;
        }
        Word(letters)
    }

    /// `λ_α = λ_{i_1} ⋯ λ_{i_k}` at a scalar point.
    pub fn eval_scalar(&self, lambda: &[C64]) -> C64 {
        self.0.iter().fold(ONE, |acc, &l| acc * lambda[l])
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "]")
    }
}

/// Number of words of length `< k`: `Σ_{j<k} n^j`.
pub fn level_offset(n: usize, k: usize) -> usize {
    if n == 1 {
        return k;
    }
    (n.pow(k as u32) - 1) / (n - 1)
}

/// `Σ_{k=0}^{m} n^k`, or `None` on overflow.
pub fn word_count(n: usize, m: usize) -> Option<usize> {
    let mut total: usize = 0;
    let mut level: usize = 1;
    for k in 0..=m {
        total = total.checked_add(level)?;
        if k < m {
            level = level.checked_mul(n)?;
        }
    }
    Some(total)
}

/// All words of length `≤ m` in graded-lex order.
pub fn enumerate_words(n: usize, m: usize) -> Vec<Word> {
    assert!(n >= 1, "need at least one generator");
    let total = word_count(n, m).expect("word count overflows usize");
    (0..total).map(|i| Word::from_graded_index(i, n)).collect()
}

/// Factorisations `γ = βα` with `|β| ≥ 1`, ordered by `|β|` ascending.
pub fn prefix_splits(gamma: &Word) -> Result<Vec<(Word, Word)>> {
    if gamma.is_empty() {
        return Err(Error::input("gamma", "prefix splits need a nonempty word"));
    }
    Ok((1..=gamma.len()).map(|k| (Word(gamma.0[..k].to_vec()), Word(gamma.0[k..].to_vec()))).collect())
}

/// Factorisations `γ = αβ` with `|β| ≥ 1`, returned as `(α, β)` ordered by `|β|` ascending.
pub fn suffix_splits(gamma: &Word) -> Result<Vec<(Word, Word)>> {
    if gamma.is_empty() {
        return Err(Error::input("gamma", "suffix splits need a nonempty word"));
    }
    let l = gamma.len();
    Ok((1..=l).map(|k| (Word(gamma.0[..l - k].to_vec()), Word(gamma.0[l - k..].to_vec()))).collect())
}

/// All words sharing a commutative multidegree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeClass {
    pub k: Vec<usize>,
    pub members: Vec<Word>,
}

impl DegreeClass {
    pub fn total_degree(&self) -> usize {
        self.k.iter().sum()
    }

    /// `λ^k`
    pub fn monomial(&self, lambda: &[C64]) -> C64 {
        monomial(&self.k, lambda)
    }
}

/// `λ^k` for a multidegree `k`.
pub fn monomial(k: &[usize], lambda: &[C64]) -> C64 {
    k.iter().zip(lambda).fold(ONE, |acc, (&p, &l)| acc * l.powi(p as i32))
}

/// The class `{α : histogram(α) = k}`, members in lexicographic order.
pub fn degree_class(k: &[usize]) -> DegreeClass {
    let total: usize = k.iter().sum();
    let mut members = Vec::new();
    let mut remaining = k.to_vec();
    let mut current = Vec::with_capacity(total);
    fill_class(&mut remaining, &mut current, total, &mut members);
    DegreeClass { k: k.to_vec(), members }
}

fn fill_class(remaining: &mut [usize], current: &mut Vec<usize>, total: usize, out: &mut Vec<Word>) {
    if current.len() == total {
        out.push(Word(current.clone()));
        return;
    }
    for i in 0..remaining.len() {
        if remaining[i] > 0 {
            remaining[i] -= 1;
            current.push(i);
            fill_class(remaining, current, total, out);
            current.pop();
            remaining[i] += 1;
        }
    }
}

/// Every multidegree over `n` letters with total degree `≤ m`, graded, and
/// within a degree ordered by the graded-lex position of the first member.
pub fn multidegrees(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for total in 0..=m {
        let mut level = Vec::new();
        compositions(n, total, &mut vec![0; n], 0, &mut level);
        level.sort_by(|a, b| b.cmp(a));
        out.extend(level);
    }
    out
}

fn compositions(n: usize, left: usize, cur: &mut Vec<usize>, pos: usize, out: &mut Vec<Vec<usize>>) {
    if pos == n - 1 {
        cur[pos] = left;
        out.push(cur.clone());
        return;
    }
    for v in 0..=left {
        cur[pos] = v;
        compositions(n, left - v, cur, pos + 1, out);
    }
}

/// `|k|! / (k_1! ⋯ k_n!)`
pub fn multinomial(k: &[usize]) -> u128 {
    let mut result: u128 = 1;
    let mut acc = 0u128;
    for &ki in k {
        for j in 1..=ki as u128 {
            acc += 1;
            result = result * acc / j;
        }
    }
    result
}
