//! File formats: dense adjacency CSV, dynamic-series manifests,
//! correlation-matrix thresholding, and the versioned result record.
//!
//! Readers reject invalid data rather than repairing it; every error names
//! the offending file and location. Writers and readers round-trip exactly.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::changepoint::DynamicNetworkSeries;
use crate::error::{Error, Result};
use crate::model::AdjacencyMatrix;

pub const MANIFEST_VERSION: &str = "series-manifest/1";
pub const RECORD_VERSION: &str = "result-record/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

fn parse_err(path: &Path, location: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        location: location.into(),
        reason: reason.into(),
    }
}

/// Parses an n-line comma-separated 0/1 square matrix; symmetry and a zero
/// diagonal are enforced. Row/column positions in errors are 1-based.
pub fn read_adjacency_csv(path: impl AsRef<Path>) -> Result<AdjacencyMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let n = lines.len();
    if n < 2 {
        return Err(parse_err(path, "file", format!("expected >= 2 rows, found {n}")));
    }
    let mut entries = vec![0u8; n * n];
    for (i, line) in lines.iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != n {
            return Err(parse_err(
                path,
                format!("row {}", i + 1),
                format!("expected {n} columns, found {}", cells.len()),
            ));
        }
        for (j, cell) in cells.iter().enumerate() {
            let v = match cell.trim() {
                "0" => 0u8,
                "1" => 1u8,
                other => {
                    return Err(parse_err(
                        path,
                        format!("({}, {})", i + 1, j + 1),
                        format!("expected 0 or 1, found {other:?}"),
                    ))
                }
            };
            entries[i * n + j] = v;
        }
    }
    for i in 0..n {
        if entries[i * n + i] != 0 {
            return Err(parse_err(
                path,
                format!("({}, {})", i + 1, i + 1),
                "nonzero diagonal entry",
            ));
        }
        for j in 0..i {
            if entries[i * n + j] != entries[j * n + i] {
                return Err(parse_err(
                    path,
                    format!("({}, {})", i + 1, j + 1),
                    "asymmetric entry",
                ));
            }
        }
    }
    AdjacencyMatrix::new(n, entries)
}

pub fn write_adjacency_csv(path: impl AsRef<Path>, a: &AdjacencyMatrix) -> Result<()> {
    let path = path.as_ref();
    let n = a.order();
    let mut out = String::with_capacity(n * (2 * n));
    for i in 0..n {
        for j in 0..n {
            if j > 0 {
                out.push(',');
            }
            out.push(if a.get(i, j) == 1 { '1' } else { '0' });
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Reads a square real-valued CSV matrix (correlation input).
pub fn read_real_csv(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let n = lines.len();
    if n < 2 {
        return Err(parse_err(path, "file", format!("expected >= 2 rows, found {n}")));
    }
    let mut m = DMatrix::zeros(n, n);
    for (i, line) in lines.iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != n {
            return Err(parse_err(
                path,
                format!("row {}", i + 1),
                format!("expected {n} columns, found {}", cells.len()),
            ));
        }
        for (j, cell) in cells.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                parse_err(
                    path,
                    format!("({}, {})", i + 1, j + 1),
                    format!("not a number: {cell:?}"),
                )
            })?;
            if !v.is_finite() {
                return Err(parse_err(
                    path,
                    format!("({}, {})", i + 1, j + 1),
                    "non-finite value",
                ));
            }
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

/// A[i][j] = 1 iff R[i][j] strictly exceeds T and i != j.
pub fn threshold_correlation(r: &DMatrix<f64>, t: f64) -> Result<AdjacencyMatrix> {
    let n = r.nrows();
    if n != r.ncols() || n < 2 {
        return Err(Error::InvalidInput(format!(
            "correlation matrix must be square of order >= 2, got {n} x {}",
            r.ncols()
        )));
    }
    for i in 0..n {
        for j in 0..i {
            if (r[(i, j)] - r[(j, i)]).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "correlation matrix asymmetric at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let mut a = AdjacencyMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if r[(i, j)] > t {
                a.set_sym(i, j, 1);
            }
        }
    }
    Ok(a)
}

/// Manifest describing a dynamic-network series on disk. Paths are taken
/// relative to the manifest's directory unless absolute.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SeriesManifest {
    pub version: String,
    pub order: usize,
    pub length: usize,
    pub paths: Vec<String>,
    /// True change-points, when the series comes from a benchmark scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<usize>>,
}

impl SeriesManifest {
    pub fn new(order: usize, paths: Vec<String>, labels: Option<Vec<usize>>) -> Self {
        Self {
            version: MANIFEST_VERSION.to_string(),
            order,
            length: paths.len(),
            paths,
            labels,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidInput(format!("manifest serialization: {e}")))?;
        fs::write(path, json + "\n").map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let m: SeriesManifest = serde_json::from_str(&text)
            .map_err(|e| parse_err(path, "manifest", e.to_string()))?;
        if m.version != MANIFEST_VERSION {
            return Err(parse_err(
                path,
                "version",
                format!("unsupported manifest version {:?}", m.version),
            ));
        }
        if m.paths.len() != m.length {
            return Err(parse_err(
                path,
                "paths",
                format!("length field {} != path count {}", m.length, m.paths.len()),
            ));
        }
        Ok(m)
    }
}

/// Loads the full series behind a manifest, validating every file; returns
/// the series and the truth labels when present.
pub fn load_series(
    manifest_path: impl AsRef<Path>,
) -> Result<(DynamicNetworkSeries, Option<Vec<usize>>)> {
    let manifest_path = manifest_path.as_ref();
    let manifest = SeriesManifest::load(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut mats = Vec::with_capacity(manifest.length);
    for rel in &manifest.paths {
        let p = resolve(base, rel);
        let a = read_adjacency_csv(&p)?;
        if a.order() != manifest.order {
            return Err(parse_err(
                &p,
                "matrix order",
                format!("expected order {}, found {}", manifest.order, a.order()),
            ));
        }
        mats.push(a);
    }
    Ok((DynamicNetworkSeries::new(mats)?, manifest.labels))
}

fn resolve(base: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Hex SHA-256 digest of arbitrary input bytes.
pub fn digest_bytes(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

/// Hex SHA-256 digest over a list of files, bound to their names.
pub fn digest_files(paths: &[PathBuf]) -> Result<String> {
    let mut hasher = Sha256::new();
    for p in paths {
        let bytes = fs::read(p).map_err(|e| Error::io(p.display().to_string(), e))?;
        hasher.update(p.display().to_string().as_bytes());
        hasher.update([0u8]);
        hasher.update(&bytes);
        hasher.update([0u8]);
    }
    Ok(format!("{:x}", hasher.finalize()))
}

/// Versioned, self-describing output record with an input digest for
/// provenance. `kind` is one of "two-sample", "changepoint", "benchmark".
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResultRecord {
    pub version: String,
    pub kind: String,
    pub inputs_digest: String,
    pub seeds: Vec<u64>,
    pub tool_version: String,
    pub invocation: Vec<String>,
    pub payload: serde_json::Value,
}

impl ResultRecord {
    pub fn new(
        kind: impl Into<String>,
        inputs_digest: impl Into<String>,
        seeds: Vec<u64>,
        invocation: Vec<String>,
        payload: serde_json::Value,
    ) -> Self {
        Self {
            version: RECORD_VERSION.to_string(),
            kind: kind.into(),
            inputs_digest: inputs_digest.into(),
            seeds,
            tool_version: TOOL_VERSION.to_string(),
            invocation,
            payload,
        }
    }

    /// Canonical serialized form (pretty JSON with a trailing newline).
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map(|s| s + "\n")
            .map_err(|e| Error::InvalidInput(format!("record serialization: {e}")))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let rec: ResultRecord = serde_json::from_str(&text)
            .map_err(|e| parse_err(path, "record", e.to_string()))?;
        if rec.version != RECORD_VERSION {
            return Err(parse_err(
                path,
                "version",
                format!("unsupported record version {:?}", rec.version),
            ));
        }
        Ok(rec)
    }
}
