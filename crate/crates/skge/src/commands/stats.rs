use std::path::Path;

use skge_core::kg::stats;

use crate::cli::CliError;
use crate::config::FileConfig;
use crate::io::{atomic_write, read_kg};
use crate::manifest::ManifestBuilder;
use crate::render;

pub fn run(
    kg_path: &Path,
    output: Option<&Path>,
    _config: &FileConfig,
    manifest_override: Option<&Path>,
) -> Result<(), CliError> {
    let mut manifest = ManifestBuilder::new("stats");
    manifest.input(kg_path)?;
    manifest.config("kg", kg_path.display().to_string());

    let kg = read_kg(kg_path)?;
    let counts = stats(&kg);
    print!("{}", render::stats_table(&counts));
    if let Some(out) = output {
        let mut json =
            serde_json::to_vec_pretty(&counts).map_err(|e| CliError::Data(e.to_string()))?;
        json.push(b'\n');
        atomic_write(out, &json)?;
    }
    manifest.write(output, manifest_override)?;
    Ok(())
}
