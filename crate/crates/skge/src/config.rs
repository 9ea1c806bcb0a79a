//! Optional JSON config file backing every CLI flag.
//!
//! One file covers all subcommands, keyed by subcommand name with values
//! named after the long flags:
//!
//! ```json
//! {
//!   "train": {"algo": "transe", "dim": 32, "epochs": 200, "lr": 0.01},
//!   "eval": {"k": 10},
//!   "project": {"method": "pca"}
//! }
//! ```
//!
//! Precedence, highest first: explicit flag, config file, environment
//! (`SCENE_KGE_THREADS` only), built-in default.

use std::path::Path;

use serde::de::DeserializeOwned;

use crate::cli::CliError;

#[derive(Debug, Default)]
pub struct FileConfig {
    value: serde_json::Value,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
        if !value.is_object() {
            return Err(CliError::Usage(format!(
                "invalid config {}: top level must be an object",
                path.display()
            )));
        }
        Ok(FileConfig { value })
    }

    /// Typed lookup of `section.key`; absent keys are `None`.
    pub fn get<T: DeserializeOwned>(&self, section: &str, key: &str) -> Result<Option<T>, CliError> {
        match self.value.get(section).and_then(|s| s.get(key)) {
            None => Ok(None),
            Some(raw) => serde_json::from_value(raw.clone()).map(Some).map_err(|e| {
                CliError::Usage(format!("config {section}.{key}: {e}"))
            }),
        }
    }

    /// Flag value, else config value, else default.
    pub fn resolve<T: DeserializeOwned>(
        &self,
        flag: Option<T>,
        section: &str,
        key: &str,
        default: T,
    ) -> Result<T, CliError> {
        Ok(flag
            .map(Ok)
            .unwrap_or_else(|| self.get(section, key).map(|v| v.unwrap_or(default)))?)
    }
}

/// Threads resolution includes the `SCENE_KGE_THREADS` environment default.
pub fn resolve_threads(
    flag: Option<usize>,
    config: &FileConfig,
    section: &str,
) -> Result<usize, CliError> {
    if let Some(t) = flag {
        return Ok(t);
    }
    if let Some(t) = config.get::<usize>(section, "threads")? {
        return Ok(t);
    }
    if let Ok(raw) = std::env::var("SCENE_KGE_THREADS") {
        return raw.parse().map_err(|_| {
            CliError::Usage(format!("SCENE_KGE_THREADS={raw:?} is not a thread count"))
        });
    }
    Ok(1)
}
