//! File formats: edge lists, data CSVs, and JSON documents for fitted
//! precision matrices and models.
//!
//! JSON floats are written in shortest round-trip form, so a reloaded model
//! reproduces every matrix entry bit for bit.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{GncError, Result};
use crate::glasso::{GlassoDiagnostics, PrecisionFit};
use crate::graph::Network;
use crate::pipeline::{GncModel, ModelConfig};

fn parse_err(line: usize, msg: impl Into<String>) -> GncError {
    GncError::Parse {
        line,
        msg: msg.into(),
    }
}

/// One edge per line as two 0-based indices separated by whitespace or a
/// comma. Blank lines and lines starting with `#` are skipped.
pub fn parse_edge_list(text: &str) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(parse_err(idx + 1, format!("expected two node indices, found {}", fields.len())));
        }
        let parse = |f: &str| {
            f.parse::<usize>()
                .map_err(|_| parse_err(idx + 1, format!("invalid node index '{f}'")))
        };
        edges.push((parse(fields[0])?, parse(fields[1])?));
    }
    Ok(edges)
}

/// Builds a network from edge-list text. Without `n` the node count is one
/// past the largest index.
pub fn network_from_edge_list(text: &str, n: Option<usize>) -> Result<Network> {
    let edges = parse_edge_list(text)?;
    let n = match n {
        Some(n) => n,
        None => edges
            .iter()
            .map(|&(a, b)| a.max(b) + 1)
            .max()
            .ok_or(GncError::NoEdges)?,
    };
    Network::from_edges(n, &edges)
}

pub fn read_network(path: &Path, n: Option<usize>) -> Result<Network> {
    network_from_edge_list(&fs::read_to_string(path)?, n)
}

pub fn write_edge_list(net: &Network) -> String {
    let mut out = String::new();
    for &(a, b) in net.edges() {
        out.push_str(&format!("{a} {b}\n"));
    }
    out
}

/// SHA-256 over the canonical edge list, prefixed by the node count.
pub fn network_hash(net: &Network) -> String {
    let mut h = Sha256::new();
    h.update(format!("n={}\n", net.n()).as_bytes());
    h.update(write_edge_list(net).as_bytes());
    hex::encode(h.finalize())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `n x p` numeric CSV with an optional header row. Empty fields, `NA` and
/// non-finite values are rejected.
pub fn parse_data_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(idx + 1);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(idx + 1);
        let parsed: Vec<Option<f64>> = rec.iter().map(|f| f.parse::<f64>().ok()).collect();
        if rows.is_empty() && width.is_none() && parsed.iter().all(|v| v.is_none()) {
            // header row
            width = Some(parsed.len());
            continue;
        }
        let mut row = Vec::with_capacity(parsed.len());
        for (col, (field, value)) in rec.iter().zip(parsed).enumerate() {
            match value {
                Some(v) if v.is_finite() => row.push(v),
                _ if field.is_empty() || field.eq_ignore_ascii_case("na") => {
                    return Err(parse_err(line, format!("missing value in column {}", col + 1)))
                }
                _ => return Err(parse_err(line, format!("invalid number '{field}' in column {}", col + 1))),
            }
        }
        match width {
            Some(w) if w != row.len() => {
                return Err(parse_err(line, format!("expected {w} fields, found {}", row.len())))
            }
            _ => width = Some(row.len()),
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(1, "no data rows"));
    }
    let p = rows[0].len();
    Ok(DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]))
}

pub fn read_data_csv(path: &Path) -> Result<DMatrix<f64>> {
    parse_data_csv(&fs::read_to_string(path)?)
}

/// Row-major CSV with shortest round-trip floats.
pub fn write_matrix_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:?}", m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Dense matrix embedded as headerless CSV text.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub csv: String,
}

impl DenseMatrix {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        DenseMatrix {
            rows: m.nrows(),
            cols: m.ncols(),
            csv: write_matrix_csv(m),
        }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        let m = parse_data_csv(&self.csv)?;
        if m.shape() != (self.rows, self.cols) {
            return Err(GncError::DimensionMismatch("embedded matrix shape".into()));
        }
        Ok(m)
    }
}

/// Symmetric precision matrix: dense diagonal plus every nonzero upper
/// off-diagonal entry as `(j, k, value)` with `j < k`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PrecisionDocument {
    pub p: usize,
    pub lambda: f64,
    pub diagonal: Vec<f64>,
    pub off_diagonal: Vec<(usize, usize, f64)>,
    /// Pairs above the support threshold.
    pub support_size: usize,
    pub diagnostics: GlassoDiagnostics<f64>,
}

impl PrecisionDocument {
    pub fn from_fit(fit: &PrecisionFit<f64>) -> Self {
        let p = fit.p();
        let theta = &fit.theta;
        let mut off = Vec::new();
        for j in 0..p {
            for k in (j + 1)..p {
                if theta[(j, k)] != 0.0 {
                    off.push((j, k, theta[(j, k)]));
                }
            }
        }
        PrecisionDocument {
            p,
            lambda: fit.lambda,
            diagonal: theta.diagonal().iter().copied().collect(),
            off_diagonal: off,
            support_size: fit.support.len(),
            diagnostics: fit.diagnostics.clone(),
        }
    }

    pub fn theta(&self) -> Result<DMatrix<f64>> {
        if self.diagonal.len() != self.p {
            return Err(GncError::DimensionMismatch("precision diagonal length".into()));
        }
        let mut theta = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.diagonal.clone()));
        for &(j, k, v) in &self.off_diagonal {
            if j >= self.p || k >= self.p || j == k {
                return Err(GncError::InvalidParameter(format!("bad precision entry ({j}, {k})")));
            }
            theta[(j, k)] = v;
            theta[(k, j)] = v;
        }
        Ok(theta)
    }
}

pub const MODEL_FORMAT: &str = "gnc-lasso-model";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub network_hash: String,
    pub alpha: f64,
    pub lambda: f64,
    pub config: ModelConfig,
    /// Whether the data columns were standardized before fitting.
    pub standardized: bool,
    pub m_hat: DenseMatrix,
    pub theta: PrecisionDocument,
}

impl ModelDocument {
    pub fn new(model: &GncModel<f64>, net: &Network, standardized: bool) -> Self {
        ModelDocument {
            format: MODEL_FORMAT.into(),
            version: 1,
            network_hash: network_hash(net),
            alpha: model.config.alpha,
            lambda: model.config.lambda,
            config: model.config.clone(),
            standardized,
            m_hat: DenseMatrix::from_matrix(&model.mean_fit.m_hat),
            theta: PrecisionDocument::from_fit(&model.precision_fit),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.format != MODEL_FORMAT {
            return Err(GncError::InvalidParameter(format!("not a model document: format '{}'", doc.format)));
        }
        if doc.m_hat.cols != doc.theta.p {
            return Err(GncError::DimensionMismatch("mean and precision widths differ".into()));
        }
        Ok(doc)
    }

    pub fn m_hat(&self) -> Result<DMatrix<f64>> {
        self.m_hat.to_matrix()
    }

    pub fn theta(&self) -> Result<DMatrix<f64>> {
        self.theta.theta()
    }
}
