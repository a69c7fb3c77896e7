use std::hash::Hasher;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use fnv::FnvHasher;
use serde::Serialize;

use crate::error::CliResult;
use crate::output::{sibling, write_json};

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub fnv1a64: String,
}

impl InputDigest {
    pub fn of(path: &Path, bytes: &[u8]) -> Self {
        Self { path: path.display().to_string(), fnv1a64: format!("{:016x}", fnv1a64(bytes)) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    /// Library-level configuration after defaults are applied.
    pub resolved: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub version: String,
    pub started: String,
    pub finished: String,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Manifest file for a primary output `out`: `out.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    sibling(out, "manifest.json")
}

/// Name recorded inside outputs; relative so reruns in another directory match.
pub fn manifest_name(out: &Path) -> String {
    manifest_path(out).file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub struct ManifestBuilder {
    manifest: RunManifest,
}

impl ManifestBuilder {
    pub fn start<C: Serialize>(command: &str, config: &C) -> Self {
        Self {
            manifest: RunManifest {
                command: command.into(),
                config: serde_json::to_value(config).unwrap_or(serde_json::Value::Null),
                resolved: serde_json::Value::Null,
                inputs: Vec::new(),
                outputs: Vec::new(),
                version: env!("CARGO_PKG_VERSION").into(),
                started: now(),
                finished: String::new(),
            },
        }
    }

    pub fn resolved<C: Serialize>(&mut self, config: &C) {
        self.manifest.resolved = serde_json::to_value(config).unwrap_or(serde_json::Value::Null);
    }

    pub fn inputs(&mut self, digests: impl IntoIterator<Item = InputDigest>) {
        self.manifest.inputs.extend(digests);
    }

    pub fn output(&mut self, path: &Path) {
        self.manifest.outputs.push(path.display().to_string());
    }

    pub fn finish(mut self, primary: &Path) -> CliResult<PathBuf> {
        self.manifest.finished = now();
        let path = manifest_path(primary);
        write_json(&path, &self.manifest)?;
        Ok(path)
    }
}
