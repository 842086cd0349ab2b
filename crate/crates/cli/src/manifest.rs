//! Run manifests: every artifact-producing run writes one JSON manifest
//! beside its primary output so figures stay auditable.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
pub struct RunManifest {
    command: Vec<String>,
    inputs: Vec<InputDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    snapshot_version: Option<String>,
    config: BTreeMap<String, serde_json::Value>,
    tool_version: String,
    timestamp: String,
}

impl RunManifest {
    pub fn new(argv: &[String]) -> Self {
        RunManifest {
            command: argv.to_vec(),
            inputs: Vec::new(),
            snapshot_version: None,
            config: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }

    pub fn input(&mut self, path: &Path, bytes: &[u8]) {
        let digest = Sha256::digest(bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex,
        });
    }

    pub fn snapshot_version(&mut self, version: &str) {
        self.snapshot_version = Some(version.to_string());
    }

    pub fn config(&mut self, key: &str, value: impl Serialize) {
        self.config.insert(
            key.to_string(),
            serde_json::to_value(value).expect("config value serializes"),
        );
    }

    /// Write `<primary_output>.manifest.json`.
    pub fn write(&self, primary_output: &Path) -> Result<PathBuf> {
        let mut path = primary_output.as_os_str().to_owned();
        path.push(".manifest.json");
        let path = PathBuf::from(path);
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        std::fs::write(&path, bytes)
            .with_context(|| format!("writing manifest {}", path.display()))?;
        Ok(path)
    }
}
