//! File loading. Every file read is recorded with its digest.

use crate::report::InputDigest;
use propinquity_core::classical::{lipnorm_from_metric, FiniteMetricSpace};
use propinquity_core::io::{self, Document, TunnelJson};
use propinquity_core::lipnorm::PolyhedralLipNorm;
use propinquity_core::tunnels::Tunnel;
use propinquity_core::Error;
use std::path::{Path, PathBuf};

/// An input problem: exit code 2.
#[derive(Debug, Clone)]
pub struct InputError {
    pub message: String,
    pub path: Option<PathBuf>,
    pub line: Option<usize>,
    pub column: Option<usize>,
}

impl InputError {
    pub fn new(message: impl Into<String>) -> Self {
        Self { message: message.into(), path: None, line: None, column: None }
    }

    pub fn at(path: &Path, message: impl Into<String>) -> Self {
        Self { message: message.into(), path: Some(path.to_path_buf()), line: None, column: None }
    }
}

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if let Some(p) = &self.path {
            write!(f, "{}", p.display())?;
            if let (Some(l), Some(c)) = (self.line, self.column) {
                write!(f, ":{l}:{c}")?;
            }
            write!(f, ": ")?;
        }
        write!(f, "{}", self.message)
    }
}

/// An endpoint: a Lip-normed algebra, and the metric space behind it when
/// it came from one.
pub struct Endpoint {
    pub lipnorm: PolyhedralLipNorm,
    pub space: Option<FiniteMetricSpace>,
}

#[derive(Default)]
pub struct Inputs {
    pub digests: Vec<InputDigest>,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> Result<String, InputError> {
        let bytes = std::fs::read(path).map_err(|e| InputError::at(path, format!("cannot read: {e}")))?;
        self.digests.push(InputDigest::of(path, &bytes));
        String::from_utf8(bytes).map_err(|_| InputError::at(path, "not UTF-8"))
    }

    pub fn document(&mut self, path: &Path) -> Result<Document, InputError> {
        let text = self.read(path)?;
        io::parse_document(&text).map_err(|e| InputError {
            message: e.message,
            path: Some(path.to_path_buf()),
            line: Some(e.line),
            column: Some(e.column),
        })
    }

    /// `.csv` files are metric spaces; JSON files hold a `space` or an
    /// `algebra` with a `lipnorm`.
    pub fn endpoint(&mut self, path: &Path) -> Result<Endpoint, InputError> {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("X").to_string();
        let core = |e: Error| InputError::at(path, e.to_string());
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            let text = self.read(path)?;
            let space = FiniteMetricSpace::from_csv(stem, &text).map_err(core)?;
            let lipnorm = lipnorm_from_metric(&space).map_err(core)?;
            return Ok(Endpoint { lipnorm, space: Some(space) });
        }
        let doc = self.document(path)?;
        if let Some(s) = &doc.space {
            let space = io::space_from_json(s, &stem).map_err(core)?;
            let lipnorm = lipnorm_from_metric(&space).map_err(core)?;
            return Ok(Endpoint { lipnorm, space: Some(space) });
        }
        match (&doc.algebra, &doc.lipnorm) {
            (Some(a), Some(l)) => {
                let alg = io::algebra_from_json(a).map_err(core)?;
                Ok(Endpoint { lipnorm: io::lipnorm_from_json(&alg, l).map_err(core)?, space: None })
            }
            _ => Err(InputError::at(path, "expected a `space`, or an `algebra` with a `lipnorm`")),
        }
    }

    pub fn space(&mut self, path: &Path) -> Result<FiniteMetricSpace, InputError> {
        self.endpoint(path)?.space.ok_or_else(|| InputError::at(path, "expected a finite metric space"))
    }

    /// A `tunnel` document, or a report whose result carries a `tunnel` or
    /// a `witness`.
    pub fn tunnel(&mut self, path: &Path) -> Result<Tunnel, InputError> {
        let text = self.read(path)?;
        let t = match serde_json::from_str::<serde_json::Value>(&text) {
            Ok(v) if v.get("schema").is_some() => {
                let found = v.get("result").and_then(|r| r.get("tunnel").or_else(|| r.get("witness")));
                let found = found.ok_or_else(|| InputError::at(path, "report carries no tunnel"))?;
                serde_json::from_value::<TunnelJson>(found.clone())
                    .map_err(|e| InputError::at(path, format!("report tunnel: {e}")))?
            }
            _ => {
                let doc = io::parse_document(&text).map_err(|e| InputError {
                    message: e.message,
                    path: Some(path.to_path_buf()),
                    line: Some(e.line),
                    column: Some(e.column),
                })?;
                doc.tunnel.ok_or_else(|| InputError::at(path, "expected a `tunnel`"))?
            }
        };
        io::tunnel_from_json(&t).map_err(|e| InputError::at(path, e.to_string()))
    }
}

/// A positive real, possibly written as a fraction like `1/2`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| format!("bad number `{s}`"))?;
            let q: f64 = q.trim().parse().map_err(|_| format!("bad number `{s}`"))?;
            p / q
        }
        None => s.parse().map_err(|_| format!("bad number `{s}`"))?,
    };
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` is not a positive real"))
    }
}

/// `0:0,1:2` as block pairs.
pub fn parse_link(text: &str) -> Result<Vec<(usize, usize)>, String> {
    text.split(',')
        .map(|pair| {
            let (i, j) = pair.trim().split_once(':').ok_or_else(|| format!("bad link pair `{pair}`"))?;
            let i = i.trim().parse().map_err(|_| format!("bad block index `{i}`"))?;
            let j = j.trim().parse().map_err(|_| format!("bad block index `{j}`"))?;
            Ok((i, j))
        })
        .collect()
}
