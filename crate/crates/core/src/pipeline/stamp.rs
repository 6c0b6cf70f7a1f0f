//! Content fingerprints and stage stamps.
//!
//! Each stage leaves `stamps/<stage>.json` recording a fingerprint of its
//! inputs and parameters plus the SHA-256 of every file it wrote. A stage
//! whose stamp matches and whose outputs still hash to the recorded values
//! is skipped.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let mut hasher = Sha256::new();
    let mut file = std::fs::File::open(path)?;
    std::io::copy(&mut file, &mut hasher)?;
    Ok(hex::encode(hasher.finalize()))
}

/// Writes `bytes` unless the file already holds exactly them; returns whether
/// the file changed.
pub fn write_if_changed(path: &Path, bytes: &[u8]) -> std::io::Result<bool> {
    if let Ok(existing) = std::fs::read(path) {
        if existing == bytes {
            return Ok(false);
        }
    }
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, bytes)?;
    Ok(true)
}

/// Files produced by one stage, relative to the output directory.
#[derive(Debug, Default)]
pub struct StageOutputs {
    files: BTreeMap<String, Vec<u8>>,
}

impl StageOutputs {
    pub fn insert(&mut self, rel: impl Into<String>, bytes: Vec<u8>) {
        self.files.insert(rel.into(), bytes);
    }

    pub fn get(&self, rel: &str) -> Option<&[u8]> {
        self.files.get(rel).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Writes every file under `root`; returns relative path → SHA-256.
    pub fn flush(&self, root: &Path) -> std::io::Result<BTreeMap<String, String>> {
        let mut hashes = BTreeMap::new();
        for (rel, bytes) in &self.files {
            write_if_changed(&root.join(rel), bytes)?;
            hashes.insert(rel.clone(), sha256_hex(bytes));
        }
        Ok(hashes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageStamp {
    pub stage: String,
    pub fingerprint: String,
    pub outputs: BTreeMap<String, String>,
    /// Stage-specific facts reported in the manifest.
    pub records: serde_json::Value,
}

pub fn stamp_path(root: &Path, stage: &str) -> PathBuf {
    root.join("stamps").join(format!("{stage}.json"))
}

impl StageStamp {
    pub fn load(root: &Path, stage: &str) -> Option<Self> {
        let text = std::fs::read(stamp_path(root, stage)).ok()?;
        serde_json::from_slice(&text).ok()
    }

    pub fn store(&self, root: &Path) -> std::io::Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self).map_err(std::io::Error::other)?;
        bytes.push(b'\n');
        write_if_changed(&stamp_path(root, &self.stage), &bytes)?;
        Ok(())
    }

    /// The stamp matches `fingerprint` and every recorded output is intact.
    pub fn is_valid(&self, root: &Path, fingerprint: &str) -> bool {
        self.fingerprint == fingerprint
            && self
                .outputs
                .iter()
                .all(|(rel, hash)| sha256_file(&root.join(rel)).is_ok_and(|h| &h == hash))
    }
}

/// Fingerprint of a stage's parameters and input hashes.
pub fn fingerprint(stage: &str, params: &serde_json::Value, inputs: &BTreeMap<String, String>) -> String {
    let doc = serde_json::json!({
        "stage": stage,
        "version": env!("CARGO_PKG_VERSION"),
        "params": params,
        "inputs": inputs,
    });
    sha256_hex(doc.to_string().as_bytes())
}
