//! Artifacts written by a run: CSV tables, SVG plots, JSON summaries and the
//! manifest that lists them with checksums.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // 17 significant digits round-trip every f64.
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, headers: &[&'static str]) -> Self {
        Self {
            name: name.into(),
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len(), "row width in {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> std::io::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| e.into_error())
    }
}

#[derive(Debug, Clone)]
pub enum Artifact {
    Csv(Table),
    Svg { name: String, body: String },
    Json { name: String, value: serde_json::Value },
}

impl Artifact {
    pub fn file_name(&self) -> String {
        match self {
            Artifact::Csv(t) => format!("{}.csv", t.name),
            Artifact::Svg { name, .. } => format!("{name}.svg"),
            Artifact::Json { name, .. } => format!("{name}.json"),
        }
    }

    fn bytes(&self) -> std::io::Result<Vec<u8>> {
        Ok(match self {
            Artifact::Csv(t) => t.to_csv()?,
            Artifact::Svg { body, .. } => body.clone().into_bytes(),
            Artifact::Json { value, .. } => {
                let mut v = serde_json::to_vec_pretty(value)?;
                v.push(b'\n');
                v
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config_sha256: String,
    pub version: String,
    pub seed: u64,
    pub workers: usize,
    pub started_at: String,
    pub wall_clock_seconds: f64,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Write artifacts in order, returning their manifest entries.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> std::io::Result<Vec<FileEntry>> {
    fs::create_dir_all(dir)?;
    artifacts
        .iter()
        .map(|a| {
            let bytes = a.bytes()?;
            let name = a.file_name();
            fs::write(dir.join(&name), &bytes)?;
            Ok(FileEntry {
                path: name,
                sha256: sha256_hex(&bytes),
                bytes: bytes.len() as u64,
            })
        })
        .collect()
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> std::io::Result<PathBuf> {
    let path = dir.join("manifest.json");
    let mut body = serde_json::to_vec_pretty(manifest)?;
    body.push(b'\n');
    fs::write(&path, body)?;
    Ok(path)
}
