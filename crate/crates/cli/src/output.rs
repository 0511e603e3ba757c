//! In-memory output set: series CSVs and JSON reports, flushed to disk with a
//! sha256 manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub tool_version: String,
    pub core_version: String,
    pub command: String,
    pub config_name: String,
    pub config_sha256: String,
    pub seed: u64,
    pub tolerance_scale: f64,
    pub files: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Default)]
pub struct OutputSet {
    files: BTreeMap<String, Vec<u8>>,
}

impl OutputSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Header row plus one row per entry of the (equally long) columns.
    pub fn add_csv(&mut self, name: &str, header: &[&str], columns: &[&[f64]]) -> CliResult<()> {
        let rows = columns.first().map_or(0, |c| c.len());
        if columns.len() != header.len() || columns.iter().any(|c| c.len() != rows) {
            return Err(CliError::Runtime(cavsim::Error::DimensionMismatch(format!(
                "{name}: {} headers for {} columns",
                header.len(),
                columns.len()
            ))));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in 0..rows {
            w.write_record(columns.iter().map(|c| format_f64(c[r])))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::io(name, e.into_error()))?;
        self.insert(name, bytes)
    }

    /// Rows of mixed text and numbers, already formatted.
    pub fn add_table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::io(name, e.into_error()))?;
        self.insert(name, bytes)
    }

    /// Pretty JSON with object keys sorted.
    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let err = |e: serde_json::Error| CliError::Runtime(cavsim::Error::InvalidState(format!("{name}: {e}")));
        let mut bytes = serde_json::to_value(value).and_then(|v| serde_json::to_vec_pretty(&v)).map_err(err)?;
        bytes.push(b'\n');
        self.insert(name, bytes)
    }

    fn insert(&mut self, name: &str, bytes: Vec<u8>) -> CliResult<()> {
        if self.files.insert(name.to_string(), bytes).is_some() {
            return Err(CliError::Runtime(cavsim::Error::InvalidState(format!("duplicate output file {name}"))));
        }
        Ok(())
    }

    /// Writes every file and the manifest into `dir`.
    pub fn flush(self, dir: &Path, mut manifest: Manifest) -> CliResult<Manifest> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        manifest.files = self
            .files
            .iter()
            .map(|(name, bytes)| ManifestEntry { path: name.clone(), sha256: sha256_hex(bytes), bytes: bytes.len() })
            .collect();
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| CliError::io(path, e))?;
        }
        let mut out = OutputSet::new();
        out.add_json(MANIFEST, &manifest)?;
        let path = dir.join(MANIFEST);
        fs::write(&path, &out.files[MANIFEST]).map_err(|e| CliError::io(path, e))?;
        Ok(manifest)
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}
