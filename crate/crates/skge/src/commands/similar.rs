use std::path::Path;

use skge_core::analytics::most_similar_scene_pairs;
use skge_core::kg::{EntityId, Vocab};

use crate::cli::CliError;
use crate::config::FileConfig;
use crate::io::{atomic_write, load_model};
use crate::manifest::ManifestBuilder;
use crate::render;

pub fn run(
    model_path: &Path,
    scenes: &[String],
    top_k: Option<usize>,
    output: Option<&Path>,
    config: &FileConfig,
    manifest_override: Option<&Path>,
) -> Result<(), CliError> {
    let top_k = config.resolve(top_k, "similar", "top-k", 10)?;

    let mut manifest = ManifestBuilder::new("similar");
    manifest.input(model_path)?;
    manifest.config("model", model_path.display().to_string());
    manifest.config("scenes", scenes);
    manifest.config("top-k", top_k);

    let loaded = load_model(model_path)?;
    let mut vocab = Vocab::new();
    for label in &loaded.entity_labels {
        vocab.intern(label).map_err(|e| CliError::Data(e.to_string()))?;
    }
    let ids: Vec<EntityId> = scenes
        .iter()
        .map(|label| {
            loaded
                .entity_id(label)
                .map(EntityId)
                .ok_or_else(|| CliError::Data(format!("unknown scene id {label:?}")))
        })
        .collect::<Result<_, _>>()?;

    let result = most_similar_scene_pairs(&loaded.model, &vocab, &ids, top_k)?;
    print!("{}", render::similarity_table(&result));
    if let Some(out) = output {
        let mut json =
            serde_json::to_vec_pretty(&result).map_err(|e| CliError::Data(e.to_string()))?;
        json.push(b'\n');
        atomic_write(out, &json)?;
    }
    manifest.write(output, manifest_override)?;
    Ok(())
}
