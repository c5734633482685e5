//! Output directory handling: CSV/JSON emission and the SHA-256 manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// 17 significant digits, the format used for every float in CSV output.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Rows of a CSV table; cells are already formatted.
#[derive(Debug, Clone, Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Writes files under one root and remembers them for the manifest.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<(String, String)>,
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    path: &'a str,
    sha256: &'a str,
    bytes: usize,
}

pub const MANIFEST: &str = "manifest.json";

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).with_context(|| format!("creating output directory {}", root.display()))?;
        Ok(Self { root, files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write_bytes(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        let digest = hex::encode(Sha256::digest(bytes));
        self.files.retain(|(p, _)| p != rel);
        self.files.push((rel.to_string(), digest));
        Ok(())
    }

    pub fn write_csv(&mut self, rel: &str, table: &Table) -> Result<()> {
        self.write_bytes(rel, table.render().as_bytes())
    }

    pub fn write_json(&mut self, rel: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).context("serialising JSON")?;
        text.push('\n');
        self.write_bytes(rel, text.as_bytes())
    }

    pub fn write_text(&mut self, rel: &str, text: &str) -> Result<()> {
        self.write_bytes(rel, text.as_bytes())
    }

    /// Writes `manifest.json` (sorted by path) and returns its bytes.
    pub fn finish(mut self) -> Result<Vec<u8>> {
        self.files.sort();
        let entries: Vec<_> = self
            .files
            .iter()
            .map(|(p, h)| ManifestEntry {
                path: p,
                sha256: h,
                bytes: fs::metadata(self.root.join(p)).map(|m| m.len() as usize).unwrap_or(0),
            })
            .collect();
        let mut text = serde_json::to_string_pretty(&serde_json::json!({ "files": entries }))?;
        text.push('\n');
        let path = self.root.join(MANIFEST);
        fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
        Ok(text.into_bytes())
    }
}

/// Re-hashes every file listed in a manifest; returns the paths that differ.
pub fn verify_manifest(root: &Path) -> Result<Vec<String>> {
    let path = root.join(MANIFEST);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let mut bad = Vec::new();
    for entry in value["files"].as_array().into_iter().flatten() {
        let rel = entry["path"].as_str().unwrap_or_default();
        let want = entry["sha256"].as_str().unwrap_or_default();
        let bytes = fs::read(root.join(rel)).with_context(|| format!("reading {rel}"))?;
        if hex::encode(Sha256::digest(&bytes)) != want {
            bad.push(rel.to_string());
        }
    }
    Ok(bad)
}

/// Column names `x_1..x_d`.
pub fn state_columns(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("x_{i}")).collect()
}

/// Compact `key=value` listing, one per line.
pub fn render_pairs(pairs: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}
