//! JSON input and report formats.
//!
//! Complex scalars are accepted as a bare number, a `[re, im]` pair or an
//! object `{"re": .., "im": ..}`. Matrices are row-major arrays of rows.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::kernel::PickProblem;
use crate::linalg::{CMat, C64};
use crate::symbol::{Coeffs, FreeSymbol, SymbolJson};
use crate::tuples::OperatorTuple;
use crate::words::Word;
use crate::{Error, Result};

pub const SCHEMA: &str = "ncdomain/1";

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ComplexJson {
    Real(f64),
    Pair([f64; 2]),
    Parts {
        re: f64,
        #[serde(default)]
        im: f64,
    },
}

impl From<ComplexJson> for C64 {
    fn from(z: ComplexJson) -> C64 {
        match z {
            ComplexJson::Real(re) => C64::new(re, 0.0),
            ComplexJson::Pair([re, im]) => C64::new(re, im),
            ComplexJson::Parts { re, im } => C64::new(re, im),
        }
    }
}

impl From<C64> for ComplexJson {
    fn from(z: C64) -> Self {
        ComplexJson::Parts { re: z.re, im: z.im }
    }
}

pub type MatrixJson = Vec<Vec<ComplexJson>>;

pub fn matrix_from_json(m: &MatrixJson, field: &str) -> Result<CMat> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::input(field, "matrix must be non-empty"));
    }
    if m.iter().any(|r| r.len() != cols) {
        return Err(Error::input(field, "rows have unequal lengths"));
    }
    let out = CMat::from_fn(rows, cols, |i, j| C64::from(m[i][j]));
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::input(field, "entries must be finite"));
    }
    Ok(out)
}

pub fn matrix_to_json(m: &CMat) -> MatrixJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect()).collect()
}

pub fn point_from_json(p: &[ComplexJson], field: &str) -> Result<Vec<C64>> {
    let out: Vec<C64> = p.iter().map(|&z| z.into()).collect();
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::input(field, "coordinates must be finite"));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TupleJson {
    #[serde(default)]
    pub d: Option<usize>,
    pub mats: Vec<MatrixJson>,
}

impl TupleJson {
    pub fn into_tuple(self, n: usize) -> Result<OperatorTuple> {
        if self.mats.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "tuple has {} operators, symbol has n = {n}",
                self.mats.len()
            )));
        }
        let mats = self
            .mats
            .iter()
            .enumerate()
            .map(|(i, m)| matrix_from_json(m, &format!("mats[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        if let Some(d) = self.d {
            if mats.iter().any(|m| m.nrows() != d) {
                return Err(Error::DimensionMismatch(format!("operators are not {d} × {d}")));
            }
        }
        OperatorTuple::new(mats)
    }

    pub fn from_tuple(t: &OperatorTuple) -> Self {
        TupleJson { d: Some(t.d()), mats: t.mats().iter().map(matrix_to_json).collect() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub word: Word,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

pub fn coeffs_from_json(entries: &[CoeffEntry], n: usize, field: &str) -> Result<Coeffs> {
    let mut out = Coeffs::new();
    for e in entries {
        if !e.word.fits(n) {
            return Err(Error::input(field, format!("word {} uses a letter ≥ n = {n}", e.word)));
        }
        if !e.re.is_finite() || !e.im.is_finite() {
            return Err(Error::input(field, format!("coefficient of {} is not finite", e.word)));
        }
        if out.insert(e.word.clone(), C64::new(e.re, e.im)).is_some() {
            return Err(Error::input(field, format!("word {} appears twice", e.word)));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PickJson {
    pub nodes: Vec<Vec<ComplexJson>>,
    pub targets: Vec<MatrixJson>,
}

impl PickJson {
    pub fn into_problem(self) -> Result<PickProblem> {
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(j, p)| point_from_json(p, &format!("nodes[{j}]")))
            .collect::<Result<Vec<_>>>()?;
        let targets = self
            .targets
            .iter()
            .enumerate()
            .map(|(j, m)| matrix_from_json(m, &format!("targets[{j}]")))
            .collect::<Result<Vec<_>>>()?;
        Ok(PickProblem { nodes, targets })
    }
}

pub fn parse_symbol(text: &str) -> Result<FreeSymbol> {
    let s: SymbolJson = parse(text, "symbol")?;
    FreeSymbol::try_from(s)
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str, field: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::input(field, e.to_string()))
}

pub fn read_file(path: &Path, field: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::input(field, format!("{}: {e}", path.display())))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, field: &str) -> Result<T> {
    parse(&read_file(path, field)?, field)
}

/// Common envelope for every report.
#[derive(Clone, Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub schema: &'static str,
    pub command: String,
    pub symbol_hash: String,
    pub level: Option<usize>,
    pub interior_degree: Option<usize>,
    pub tolerances: BTreeMap<String, f64>,
    pub result: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &str, f: &FreeSymbol, result: T) -> Self {
        Report {
            schema: SCHEMA,
            command: command.to_string(),
            symbol_hash: f.hash(),
            level: None,
            interior_degree: None,
            tolerances: BTreeMap::new(),
            result,
        }
    }

    pub fn level(mut self, level: usize, interior_degree: usize) -> Self {
        self.level = Some(level);
        self.interior_degree = Some(interior_degree);
        self
    }

    pub fn tolerance(mut self, name: &str, value: f64) -> Self {
        self.tolerances.insert(name.to_string(), value);
        self
    }
}
