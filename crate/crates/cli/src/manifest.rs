//! Run manifests: one JSON file per command invocation recording the
//! exact flags, input and output digests, and the row/window counts at
//! every pipeline stage. Reruns with the same inputs and flags produce
//! byte-identical manifests when `SOURCE_DATE_EPOCH` pins the timestamp.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// A file the run read or wrote, addressed by path and content digest.
#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Threshold decision recorded by `detect`.
#[derive(Debug, Serialize)]
pub struct ThresholdRecord {
    pub strategy: String,
    pub value: f64,
}

/// The audit record of one command invocation.
///
/// Field order is fixed by the struct, map keys sort alphabetically, and
/// the timestamp honors `SOURCE_DATE_EPOCH`, so equal runs serialize to
/// equal bytes.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` overrides the
    /// wall clock for reproducible reruns.
    pub created_unix: u64,
    pub flags: BTreeMap<String, serde_json::Value>,
    pub counts: BTreeMap<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdRecord>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix: manifest_timestamp(),
            flags: BTreeMap::new(),
            counts: BTreeMap::new(),
            threshold: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn flag(&mut self, name: &str, value: impl Into<serde_json::Value>) {
        self.flags.insert(name.to_string(), value.into());
    }

    pub fn count(&mut self, name: &str, value: impl Into<serde_json::Value>) {
        self.counts.insert(name.to_string(), value.into());
    }

    /// Records a count that may be NaN (e.g. a missing validation loss)
    /// as `null`, since JSON has no NaN.
    pub fn count_f64(&mut self, name: &str, value: f64) {
        let v = if value.is_finite() {
            serde_json::Value::from(value)
        } else {
            serde_json::Value::Null
        };
        self.counts.insert(name.to_string(), v);
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(digest_file(path)?);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) -> Result<()> {
        self.outputs.push(digest_file(path)?);
        Ok(())
    }

    /// Serializes to pretty JSON with a trailing newline.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)
            .with_context(|| format!("writing manifest {}", path.display()))?;
        Ok(())
    }
}

fn digest_file(path: &Path) -> Result<FileDigest> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("digesting {}", path.display()))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: hex::encode(hasher.finalize()),
    })
}

fn manifest_timestamp() -> u64 {
    if let Ok(raw) = std::env::var("SOURCE_DATE_EPOCH") {
        if let Ok(fixed) = raw.trim().parse::<u64>() {
            return fixed;
        }
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
