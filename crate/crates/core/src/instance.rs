//! JSON file formats.
//!
//! Chains list `dims` and `maps` from vertex `m` down to `0`, so `maps[0]` is
//! `phi_m : V_m -> V_{m-1}`. A matrix is written as rows of `[re, im]` pairs;
//! a flat row-major list of pairs is accepted on input too. Parameters are
//! arrays of `"p/q"` strings in the same descending order.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::ags::{LedgerInput, RankDegree, SheafChainType};
use crate::linalg::{zeros, CMat, C64};
use crate::quiver::{validate_rep, Chain, ChainShape, DimVector, Representation, ShapeViolation};
use crate::stability::{format_rational, parse_rational, StabilityParam};
use crate::vortex::{FlowOutcome, HermitianMetric};

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{field}: expected {expected} entries, got {got}")]
    Length { field: String, expected: usize, got: usize },
    #[error("{field}: matrix has {got} entries, shape needs {rows}x{cols}")]
    MatrixSize { field: String, rows: usize, cols: usize, got: usize },
    #[error("{field}: ragged rows")]
    Ragged { field: String },
    #[error("shape mismatch: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Shape(Vec<ShapeViolation>),
    #[error("{field}: {msg}")]
    Value { field: String, msg: String },
}

/// A matrix as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixJson {
    Rows(Vec<Vec<[f64; 2]>>),
    Flat(Vec<[f64; 2]>),
}

impl MatrixJson {
    pub fn from_mat(m: &CMat) -> Self {
        MatrixJson::Rows((0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect())
    }

    /// Reads into a `rows x cols` matrix. An empty row list is accepted for
    /// any shape with a zero side.
    pub fn to_mat(&self, rows: usize, cols: usize, field: &str) -> Result<CMat, InstanceError> {
        let flat: Vec<[f64; 2]> = match self {
            MatrixJson::Flat(v) => v.clone(),
            MatrixJson::Rows(rs) => {
                if rs.is_empty() || rows == 0 {
                    if rs.iter().all(|r| r.is_empty()) && rows * cols == 0 {
                        return Ok(zeros(rows, cols));
                    }
                }
                if rs.len() != rows {
                    let got = rs.iter().map(|r| r.len()).sum();
                    return Err(InstanceError::MatrixSize { field: field.into(), rows, cols, got });
                }
                if rs.iter().any(|r| r.len() != cols) {
                    return Err(InstanceError::Ragged { field: field.into() });
                }
                rs.iter().flatten().copied().collect()
            }
        };
        if flat.len() != rows * cols {
            return Err(InstanceError::MatrixSize { field: field.into(), rows, cols, got: flat.len() });
        }
        if flat.iter().flatten().any(|x| !x.is_finite()) {
            return Err(InstanceError::Value { field: field.into(), msg: "non-finite entry".into() });
        }
        Ok(CMat::from_fn(rows, cols, |r, c| {
            let [re, im] = flat[r * cols + c];
            C64::new(re, im)
        }))
    }

    fn declared_shape(&self) -> Option<(usize, usize)> {
        match self {
            MatrixJson::Rows(rs) => Some((rs.len(), rs.first().map_or(0, |r| r.len()))),
            MatrixJson::Flat(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainJson {
    pub m: usize,
    pub dims: Vec<usize>,
    pub maps: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ChainJson {
    pub fn from_chain(c: &Chain, seed: Option<u64>) -> Self {
        let m = c.m();
        ChainJson {
            m,
            dims: (0..=m).rev().map(|i| c.dim(i)).collect(),
            maps: (1..=m).rev().map(|i| MatrixJson::from_mat(c.phi(i))).collect(),
            seed,
        }
    }

    pub fn to_chain(&self, field: &str) -> Result<Chain, InstanceError> {
        let m = self.m;
        if self.dims.len() != m + 1 {
            return Err(InstanceError::Length { field: format!("{field}.dims"), expected: m + 1, got: self.dims.len() });
        }
        if self.maps.len() != m {
            return Err(InstanceError::Length { field: format!("{field}.maps"), expected: m, got: self.maps.len() });
        }
        let dims: Vec<usize> = self.dims.iter().rev().copied().collect();
        // nested rows carry their own shape: check it the same way validate_rep would
        let mut violations = Vec::new();
        let mut maps = Vec::with_capacity(m);
        for i in 1..=m {
            let mj = &self.maps[m - i];
            let expected = (dims[i - 1], dims[i]);
            if let Some(actual) = mj.declared_shape() {
                let nonempty = actual.0 * actual.1 > 0 || expected.0 * expected.1 > 0;
                if nonempty && actual != expected {
                    violations.push(ShapeViolation { arrow: format!("phi{i}"), expected, actual });
                    continue;
                }
            }
            maps.push(mj.to_mat(expected.0, expected.1, &format!("{field}.maps[{}]", m - i))?);
        }
        if !violations.is_empty() {
            return Err(InstanceError::Shape(violations));
        }
        let rep = Representation::new_unchecked(ChainShape { m }.quiver(), DimVector(dims), maps)
            .map_err(|e| InstanceError::Value { field: field.into(), msg: e.to_string() })?;
        validate_rep(&rep).map_err(InstanceError::Shape)?;
        Chain::from_rep(rep).map_err(|e| InstanceError::Value { field: field.into(), msg: e.to_string() })
    }
}

/// Parameters in descending vertex order as `"p/q"` strings.
pub fn param_to_json(a: &StabilityParam) -> Vec<String> {
    a.0.iter().rev().map(format_rational).collect()
}

pub fn param_from_json(v: &[String], field: &str) -> Result<StabilityParam, InstanceError> {
    let mut out = Vec::with_capacity(v.len());
    for s in v.iter().rev() {
        out.push(parse_rational(s).map_err(|e| InstanceError::Value { field: field.into(), msg: e.0 })?);
    }
    Ok(StabilityParam(out))
}

/// A pair `(C', C'')` plus optional parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairInstance {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub c_prime: ChainJson,
    pub c_dprime: ChainJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_prime: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_dprime: Option<Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct ParsedPair {
    pub id: String,
    pub seed: Option<u64>,
    pub c_prime: Chain,
    pub c_dprime: Chain,
    pub alpha_prime: Option<StabilityParam>,
    pub alpha_dprime: Option<StabilityParam>,
}

impl PairInstance {
    pub fn parse(text: &str) -> Result<ParsedPair, InstanceError> {
        let raw: PairInstance = serde_json::from_str(text)?;
        raw.resolve()
    }

    pub fn resolve(&self) -> Result<ParsedPair, InstanceError> {
        let c_prime = self.c_prime.to_chain("c_prime")?;
        let c_dprime = self.c_dprime.to_chain("c_dprime")?;
        if c_prime.m() != c_dprime.m() {
            return Err(InstanceError::Length { field: "c_dprime.m".into(), expected: c_prime.m(), got: c_dprime.m() });
        }
        let m = c_prime.m();
        let param = |v: &Option<Vec<String>>, f: &str| -> Result<Option<StabilityParam>, InstanceError> {
            match v {
                None => Ok(None),
                Some(v) if v.len() != m + 1 => {
                    Err(InstanceError::Length { field: f.into(), expected: m + 1, got: v.len() })
                }
                Some(v) => param_from_json(v, f).map(Some),
            }
        };
        Ok(ParsedPair {
            id: self.id.clone(),
            seed: self.seed,
            alpha_prime: param(&self.alpha_prime, "alpha_prime")?,
            alpha_dprime: param(&self.alpha_dprime, "alpha_dprime")?,
            c_prime,
            c_dprime,
        })
    }

    pub fn from_parts(
        id: String,
        seed: Option<u64>,
        c_prime: &Chain,
        c_dprime: &Chain,
        alpha_prime: Option<&StabilityParam>,
        alpha_dprime: Option<&StabilityParam>,
    ) -> Self {
        PairInstance {
            id,
            seed,
            c_prime: ChainJson::from_chain(c_prime, None),
            c_dprime: ChainJson::from_chain(c_dprime, None),
            alpha_prime: alpha_prime.map(param_to_json),
            alpha_dprime: alpha_dprime.map(param_to_json),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SheafTypeJson {
    /// Descending `m..0`.
    pub ranks: Vec<usize>,
    pub degrees: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankDegreeJson {
    pub rank: usize,
    pub degree: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CokerJson {
    pub i: usize,
    pub rank: usize,
    pub degree: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerJson {
    pub genus: i64,
    pub alpha: Vec<String>,
    pub c_prime: SheafTypeJson,
    pub c_dprime: SheafTypeJson,
    pub ker: RankDegreeJson,
    pub coker: Vec<CokerJson>,
}

fn sheaf_type(t: &SheafTypeJson, field: &str) -> Result<SheafChainType, InstanceError> {
    if t.ranks.len() != t.degrees.len() {
        return Err(InstanceError::Length { field: format!("{field}.degrees"), expected: t.ranks.len(), got: t.degrees.len() });
    }
    SheafChainType::new(
        t.ranks.iter().rev().copied().collect(),
        t.degrees.iter().rev().map(|&d| BigInt::from(d)).collect(),
    )
    .map_err(|e| InstanceError::Value { field: field.into(), msg: e.to_string() })
}

impl LedgerJson {
    pub fn parse(text: &str) -> Result<LedgerInput, InstanceError> {
        let raw: LedgerJson = serde_json::from_str(text)?;
        raw.resolve()
    }

    pub fn resolve(&self) -> Result<LedgerInput, InstanceError> {
        let c_prime = sheaf_type(&self.c_prime, "c_prime")?;
        let c_dprime = sheaf_type(&self.c_dprime, "c_dprime")?;
        let m = c_prime.m();
        if self.alpha.len() != m + 1 {
            return Err(InstanceError::Length { field: "alpha".into(), expected: m + 1, got: self.alpha.len() });
        }
        let alpha = param_from_json(&self.alpha, "alpha")?;
        let mut coker = vec![None; m];
        for c in &self.coker {
            if c.i == 0 || c.i > m {
                return Err(InstanceError::Value { field: "coker".into(), msg: format!("index {} outside 1..={m}", c.i) });
            }
            if coker[c.i - 1].replace(RankDegree::new(c.rank, c.degree)).is_some() {
                return Err(InstanceError::Value { field: "coker".into(), msg: format!("index {} repeated", c.i) });
            }
        }
        let coker = coker.into_iter().map(|c| c.unwrap_or(RankDegree::new(0, 0))).collect();
        let l = LedgerInput {
            genus: self.genus,
            alpha,
            c_prime,
            c_dprime,
            ker: RankDegree::new(self.ker.rank, self.ker.degree),
            coker,
        };
        l.validate().map_err(|e| InstanceError::Value { field: "ledger".into(), msg: e.to_string() })?;
        Ok(l)
    }
}

/// A flow outcome as written to disk: metric blocks descending `m..0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowJson {
    pub converged: bool,
    pub status: crate::vortex::FlowStatus,
    pub iterations: usize,
    pub residual_norm: f64,
    pub metric: Vec<MatrixJson>,
}

impl FlowJson {
    pub fn from_outcome(o: &FlowOutcome) -> Self {
        FlowJson {
            converged: o.converged,
            status: o.status,
            iterations: o.iterations,
            residual_norm: o.residual_norm,
            metric: o.metric.blocks.iter().rev().map(MatrixJson::from_mat).collect(),
        }
    }

    pub fn metric(&self, dims: &[usize]) -> Result<HermitianMetric, InstanceError> {
        if self.metric.len() != dims.len() {
            return Err(InstanceError::Length { field: "metric".into(), expected: dims.len(), got: self.metric.len() });
        }
        let blocks = dims
            .iter()
            .enumerate()
            .map(|(v, &d)| self.metric[dims.len() - 1 - v].to_mat(d, d, "metric"))
            .collect::<Result<_, _>>()?;
        Ok(HermitianMetric { blocks })
    }
}
