//! Run manifests: enough provenance to reproduce any successful run.
//!
//! A manifest records the subcommand, every resolved configuration value,
//! SHA-256 digests of the input files, the seed, the tool version, and the
//! wall time. Reruns of a manifest's configuration with `threads = 1`
//! produce byte-identical outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::io::{atomic_write, sha256_hex, IoError};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: serde_json::Map<String, serde_json::Value>,
    pub inputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub wall_time_secs: f64,
}

/// Collects manifest fields while a command runs, then writes the file.
pub struct ManifestBuilder {
    subcommand: String,
    config: serde_json::Map<String, serde_json::Value>,
    inputs: BTreeMap<String, String>,
    seed: Option<u64>,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(subcommand: &str) -> Self {
        ManifestBuilder {
            subcommand: subcommand.to_string(),
            config: serde_json::Map::new(),
            inputs: BTreeMap::new(),
            seed: None,
            started: Instant::now(),
        }
    }

    /// Records one resolved configuration value.
    pub fn config(&mut self, key: &str, value: impl Serialize) {
        self.config.insert(
            key.to_string(),
            serde_json::to_value(value).expect("config value serializes"),
        );
    }

    /// Digests one input file into the manifest.
    pub fn input(&mut self, path: &Path) -> Result<(), IoError> {
        self.inputs
            .insert(path.display().to_string(), sha256_hex(path)?);
        Ok(())
    }

    pub fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    /// Writes the manifest next to `output` (as `<output>.manifest.json`),
    /// or to `override_path` when given, or to `skge.manifest.json`.
    pub fn write(
        self,
        output: Option<&Path>,
        override_path: Option<&Path>,
    ) -> Result<PathBuf, IoError> {
        let target = match (override_path, output) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(out)) => {
                let mut name = out.as_os_str().to_owned();
                name.push(".manifest.json");
                PathBuf::from(name)
            }
            (None, None) => PathBuf::from("skge.manifest.json"),
        };
        let manifest = RunManifest {
            subcommand: self.subcommand,
            config: self.config,
            inputs: self.inputs,
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_secs: self.started.elapsed().as_secs_f64(),
        };
        let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        json.push(b'\n');
        atomic_write(&target, &json)?;
        Ok(target)
    }
}

/// RFC 3339 timestamp; honors `SOURCE_DATE_EPOCH` for reproducible output.
pub fn timestamp_now() -> String {
    if let Ok(raw) = std::env::var("SOURCE_DATE_EPOCH") {
        if let Ok(epoch) = raw.parse::<i64>() {
            if let Some(dt) = chrono::DateTime::from_timestamp(epoch, 0) {
                return dt.to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
            }
        }
    }
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}
