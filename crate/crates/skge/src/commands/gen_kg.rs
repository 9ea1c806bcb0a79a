use std::fs;
use std::path::Path;

use skge_core::kg::{stats, write_triples};
use skge_core::scene::{emit_triples, load_ontology_config, load_scene_dataset};

use crate::cli::CliError;
use crate::config::FileConfig;
use crate::io::atomic_write;
use crate::manifest::ManifestBuilder;
use crate::render;

pub fn run(
    scenes_path: &Path,
    ontology_path: &Path,
    output: &Path,
    _config: &FileConfig,
    manifest_override: Option<&Path>,
) -> Result<(), CliError> {
    let mut manifest = ManifestBuilder::new("gen-kg");
    manifest.input(scenes_path)?;
    manifest.input(ontology_path)?;
    manifest.config("scenes", scenes_path.display().to_string());
    manifest.config("ontology", ontology_path.display().to_string());
    manifest.config("output", output.display().to_string());

    let scenes_text = fs::read_to_string(scenes_path)
        .map_err(|e| CliError::Data(format!("{}: {e}", scenes_path.display())))?;
    let ontology_text = fs::read_to_string(ontology_path)
        .map_err(|e| CliError::Data(format!("{}: {e}", ontology_path.display())))?;
    let dataset = load_scene_dataset(&scenes_text)?;
    let ontology = load_ontology_config(&ontology_text)?;
    let kg = emit_triples(&dataset, &ontology)?;

    atomic_write(output, write_triples(&kg).as_bytes())?;
    print!("{}", render::stats_table(&stats(&kg)));
    manifest.write(Some(output), manifest_override)?;
    Ok(())
}
