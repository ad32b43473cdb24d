//! JSON interchange formats.
//!
//! * algebra: `{"label": str, "blocks": [int]}`
//! * Lip-norm: `{"algebra": label, "functionals": [[real]]}` in basis
//!   coordinates
//! * epimorphism: `{"source": label, "target": label, "block_map": [int],
//!   "unitaries": [[[c]]]?}`
//! * state: `{"algebra": label, "blocks": [[[c]] | p]}` with per-block density
//!   matrices, a bare number standing for a `1×1` block
//! * space: `{"label": str?, "points": [str], "dist": [[real | str]]}`
//! * tunnel: `{"D", "lipnorm", "legA", "legB", "endpointA", "endpointB",
//!   "provenance", "epsilon"?, "mode"?}`, endpoints being
//!   `{"algebra": algebra, "lipnorm": lipnorm}`
//!
//! Complex entries `c` are either a real number or a `[re, im]` pair, and
//! matrices are row-major. A document is an object holding any of the keys
//! `algebra`, `lipnorm`, `space`, `state`, `states`, `tunnel`.

use crate::algebra::{Algebra, CMatrix, StarEpimorphism};
use crate::classical::FiniteMetricSpace;
use crate::error::{Error, Result};
use crate::lipnorm::PolyhedralLipNorm;
use crate::states::{Mode, State};
use crate::tunnels::{Provenance, Tunnel};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraJson {
    pub label: String,
    pub blocks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipNormJson {
    pub algebra: String,
    pub functionals: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexJson {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexJson> for Complex64 {
    fn from(c: ComplexJson) -> Self {
        match c {
            ComplexJson::Real(r) => Complex64::new(r, 0.0),
            ComplexJson::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

pub type MatrixJson = Vec<Vec<ComplexJson>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpimorphismJson {
    pub source: String,
    pub target: String,
    pub block_map: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitaries: Option<Vec<MatrixJson>>,
}

/// A density-matrix block; `1×1` blocks may be given as a bare number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BlockJson {
    Scalar(f64),
    Matrix(MatrixJson),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    pub algebra: String,
    pub blocks: Vec<BlockJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumberJson {
    Number(f64),
    Literal(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub points: Vec<String>,
    pub dist: Vec<Vec<NumberJson>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointJson {
    pub algebra: AlgebraJson,
    pub lipnorm: LipNormJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunnelJson {
    #[serde(rename = "D")]
    pub d: AlgebraJson,
    pub lipnorm: LipNormJson,
    #[serde(rename = "legA")]
    pub leg_a: EpimorphismJson,
    #[serde(rename = "legB")]
    pub leg_b: EpimorphismJson,
    #[serde(rename = "endpointA")]
    pub endpoint_a: EndpointJson,
    #[serde(rename = "endpointB")]
    pub endpoint_b: EndpointJson,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<AlgebraJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipnorm: Option<LipNormJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<BTreeMap<String, StateJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tunnel: Option<TunnelJson>,
}

/// A JSON syntax or shape error with its position.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

pub fn parse_document(text: &str) -> std::result::Result<Document, ParseError> {
    serde_json::from_str(text).map_err(|e| ParseError { line: e.line(), column: e.column(), message: e.to_string() })
}

pub fn algebra_to_json(a: &Algebra) -> AlgebraJson {
    AlgebraJson { label: a.label().to_string(), blocks: a.blocks().to_vec() }
}

pub fn algebra_from_json(j: &AlgebraJson) -> Result<Arc<Algebra>> {
    Algebra::new(j.label.clone(), j.blocks.clone())
}

pub fn lipnorm_to_json(l: &PolyhedralLipNorm) -> LipNormJson {
    LipNormJson { algebra: l.algebra().label().to_string(), functionals: l.functionals().to_vec() }
}

pub fn lipnorm_from_json(algebra: &Arc<Algebra>, j: &LipNormJson) -> Result<PolyhedralLipNorm> {
    if j.algebra != algebra.label() {
        return Err(Error::Input(format!(
            "Lip-norm refers to algebra {:?}, expected {:?}",
            j.algebra,
            algebra.label()
        )));
    }
    PolyhedralLipNorm::new(algebra, j.functionals.clone())
}

fn matrix_from_json(m: &MatrixJson, what: &str) -> Result<CMatrix> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::Input(format!("{what} is not a square matrix")));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| m[i][j].into()))
}

fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| {
                    let z = m[(i, j)];
                    if z.im == 0.0 {
                        ComplexJson::Real(z.re)
                    } else {
                        ComplexJson::Pair([z.re, z.im])
                    }
                })
                .collect()
        })
        .collect()
}

pub fn epimorphism_to_json(pi: &StarEpimorphism) -> EpimorphismJson {
    EpimorphismJson {
        source: pi.source().label().to_string(),
        target: pi.target().label().to_string(),
        block_map: pi.block_map().to_vec(),
        unitaries: pi.unitaries().map(|us| us.iter().map(matrix_to_json).collect()),
    }
}

pub fn epimorphism_from_json(
    source: &Arc<Algebra>,
    target: &Arc<Algebra>,
    j: &EpimorphismJson,
) -> Result<StarEpimorphism> {
    if j.source != source.label() || j.target != target.label() {
        return Err(Error::Input(format!(
            "epimorphism {} → {} does not connect {} → {}",
            j.source,
            j.target,
            source.label(),
            target.label()
        )));
    }
    let unitaries = match &j.unitaries {
        None => None,
        Some(us) => Some(
            us.iter()
                .enumerate()
                .map(|(k, u)| matrix_from_json(u, &format!("unitary {k}")))
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    StarEpimorphism::new(source, target, j.block_map.clone(), unitaries)
}

pub fn state_to_json(s: &State) -> StateJson {
    let blocks = s
        .blocks()
        .iter()
        .map(|m| if m.nrows() == 1 { BlockJson::Scalar(m[(0, 0)].re) } else { BlockJson::Matrix(matrix_to_json(m)) })
        .collect();
    StateJson { algebra: s.algebra().label().to_string(), blocks }
}

pub fn state_from_json(algebra: &Arc<Algebra>, j: &StateJson) -> Result<State> {
    if j.algebra != algebra.label() {
        return Err(Error::Input(format!("state lives on {:?}, expected {:?}", j.algebra, algebra.label())));
    }
    let blocks = j
        .blocks
        .iter()
        .enumerate()
        .map(|(b, m)| match m {
            BlockJson::Scalar(p) => Ok(CMatrix::from_element(1, 1, Complex64::new(*p, 0.0))),
            BlockJson::Matrix(m) => matrix_from_json(m, &format!("state block {b}")),
        })
        .collect::<Result<Vec<_>>>()?;
    State::from_blocks(algebra, &blocks)
}

pub fn space_from_json(j: &SpaceJson, default_label: &str) -> Result<FiniteMetricSpace> {
    let label = j.label.clone().unwrap_or_else(|| default_label.to_string());
    let literals: Vec<Vec<String>> = j
        .dist
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| match v {
                    // shortest representation that round-trips to the same double
                    NumberJson::Number(x) => format!("{x:?}"),
                    NumberJson::Literal(s) => s.clone(),
                })
                .collect()
        })
        .collect();
    let all_numbers = j.dist.iter().flatten().all(|v| matches!(v, NumberJson::Number(_)));
    if all_numbers {
        let dist = j
            .dist
            .iter()
            .map(|row| row.iter().map(|v| if let NumberJson::Number(x) = v { *x } else { 0.0 }).collect())
            .collect();
        FiniteMetricSpace::new(label, j.points.clone(), dist)
    } else {
        FiniteMetricSpace::from_literals(label, j.points.clone(), &literals)
    }
}

pub fn space_to_json(x: &FiniteMetricSpace) -> SpaceJson {
    SpaceJson {
        label: Some(x.label().to_string()),
        points: x.points().to_vec(),
        dist: x.dist().iter().map(|r| r.iter().map(|&v| NumberJson::Number(v)).collect()).collect(),
    }
}

fn endpoint_to_json(l: &PolyhedralLipNorm) -> EndpointJson {
    EndpointJson { algebra: algebra_to_json(l.algebra()), lipnorm: lipnorm_to_json(l) }
}

fn endpoint_from_json(j: &EndpointJson) -> Result<PolyhedralLipNorm> {
    lipnorm_from_json(&algebra_from_json(&j.algebra)?, &j.lipnorm)
}

pub fn tunnel_to_json(t: &Tunnel) -> TunnelJson {
    TunnelJson {
        d: algebra_to_json(t.algebra()),
        lipnorm: lipnorm_to_json(t.lipnorm()),
        leg_a: epimorphism_to_json(t.leg_a()),
        leg_b: epimorphism_to_json(t.leg_b()),
        endpoint_a: endpoint_to_json(t.end_a()),
        endpoint_b: endpoint_to_json(t.end_b()),
        provenance: t.provenance(),
        epsilon: t.epsilon(),
        mode: Some(t.mode()),
    }
}

/// Rebuilds a tunnel; the quotient conditions are not checked here.
pub fn tunnel_from_json(j: &TunnelJson) -> Result<Tunnel> {
    let d = algebra_from_json(&j.d)?;
    let l = lipnorm_from_json(&d, &j.lipnorm)?;
    let end_a = endpoint_from_json(&j.endpoint_a)?;
    let end_b = endpoint_from_json(&j.endpoint_b)?;
    let leg_a = epimorphism_from_json(&d, end_a.algebra(), &j.leg_a)?;
    let leg_b = epimorphism_from_json(&d, end_b.algebra(), &j.leg_b)?;
    let t = Tunnel::new(l, leg_a, leg_b, end_a, end_b, j.provenance, j.epsilon)?;
    let mode = t.mode().combine(j.mode.unwrap_or(Mode::Exact));
    Ok(t.with_mode(mode))
}

/// Rounds to the nearest multiple of `1e-12`, which is how reports print
/// computed values.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x.abs() > 1e6 {
        return x;
    }
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}
