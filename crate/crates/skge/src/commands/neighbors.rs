use std::path::Path;

use skge_core::analytics::nearest_neighbors;
use skge_core::kg::EntityId;

use crate::cli::CliError;
use crate::config::FileConfig;
use crate::io::load_model;
use crate::manifest::ManifestBuilder;
use crate::render;

pub fn run(
    model_path: &Path,
    entity: &str,
    k: Option<usize>,
    config: &FileConfig,
    manifest_override: Option<&Path>,
) -> Result<(), CliError> {
    let k = config.resolve(k, "neighbors", "k", 10)?;

    let mut manifest = ManifestBuilder::new("neighbors");
    manifest.input(model_path)?;
    manifest.config("model", model_path.display().to_string());
    manifest.config("entity", entity);
    manifest.config("k", k);

    let loaded = load_model(model_path)?;
    let id = loaded
        .entity_id(entity)
        .map(EntityId)
        .ok_or_else(|| CliError::Data(format!("unknown entity {entity:?}")))?;
    let neighbors = nearest_neighbors(&loaded.model, id, k)?;
    let labeled: Vec<(String, f64)> = neighbors
        .into_iter()
        .map(|(e, cos)| (loaded.entity_labels[e.index()].clone(), cos))
        .collect();
    print!("{}", render::neighbors_table(&labeled));
    manifest.write(None, manifest_override)?;
    Ok(())
}
