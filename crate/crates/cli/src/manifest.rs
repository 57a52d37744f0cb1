//! Run manifests and hashed output artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use roelab::{Error, Result};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reproduce a run. Contains no timestamps or host
/// data, so identical inputs give byte-identical manifests.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub config_path: Option<String>,
    pub parameters: Value,
    pub seeds: Vec<u64>,
    pub run_hash: String,
    pub artifacts: Vec<Artifact>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `sha256(version, subcommand, canonical JSON of the parameters)`.
///
/// `serde_json` maps keep keys sorted, so the JSON text is canonical.
pub fn run_hash(subcommand: &str, parameters: &Value) -> String {
    let text = format!("roelab {VERSION}\n{subcommand}\n{parameters}");
    sha256_hex(text.as_bytes())
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(std::io::Error::other(format!("{}: {e}", path.display())))
}

/// Output directory plus the manifest being accumulated for one run.
pub struct Run {
    dir: PathBuf,
    manifest: ExperimentManifest,
}

impl Run {
    pub fn new(
        subcommand: &str,
        config_path: Option<&Path>,
        parameters: &impl Serialize,
        seeds: Vec<u64>,
        dir: PathBuf,
    ) -> Result<Self> {
        let parameters = serde_json::to_value(parameters).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let hash = run_hash(subcommand, &parameters);
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        Ok(Run {
            dir,
            manifest: ExperimentManifest {
                tool: "roelab",
                version: VERSION,
                subcommand: subcommand.to_string(),
                config_path: config_path.map(|p| p.display().to_string()),
                parameters,
                seeds,
                run_hash: hash,
                artifacts: Vec::new(),
            },
        })
    }

    pub fn hash(&self) -> &str {
        &self.manifest.run_hash
    }

    /// Writes `bytes` to `name` in the output directory and records its hash.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
        self.manifest.artifacts.push(Artifact { path: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(path)
    }

    /// CSV with a leading `run` column holding the run hash.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let to_err = |e: csv::Error| Error::Io(e.into());
        w.write_record(std::iter::once("run").chain(header.iter().copied())).map_err(to_err)?;
        for r in rows {
            if r.len() != header.len() {
                return Err(Error::InvalidArgument(format!("{name}: row has {} fields, header {}", r.len(), header.len())));
            }
            w.write_record(std::iter::once(self.hash()).chain(r.iter().map(String::as_str))).map_err(to_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.write(name, &bytes)
    }

    /// JSON lines; every record gets a `run` field.
    pub fn jsonl(&mut self, name: &str, records: Vec<Value>) -> Result<PathBuf> {
        let mut out = String::new();
        for mut r in records {
            if let Value::Object(m) = &mut r {
                m.insert("run".into(), json!(self.hash()));
            }
            out.push_str(&r.to_string());
            out.push('\n');
        }
        self.write(name, out.as_bytes())
    }

    /// Writes `manifest-<subcommand>.json` and returns its path.
    pub fn finish(self) -> Result<PathBuf> {
        let name = format!("manifest-{}.json", self.manifest.subcommand);
        let path = self.dir.join(&name);
        let mut text =
            serde_json::to_string_pretty(&self.manifest).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        Ok(path)
    }
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}
