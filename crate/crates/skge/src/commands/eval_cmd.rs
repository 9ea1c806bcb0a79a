use std::path::Path;

use skge_core::eval::eval_report;

use crate::cli::CliError;
use crate::config::FileConfig;
use crate::io::{atomic_write, load_model, read_kg};
use crate::manifest::{timestamp_now, ManifestBuilder};
use crate::render;

pub fn run(
    model_path: &Path,
    kg_path: &Path,
    k: Option<usize>,
    output: Option<&Path>,
    config: &FileConfig,
    manifest_override: Option<&Path>,
) -> Result<(), CliError> {
    let k = config.resolve(k, "eval", "k", 10)?;

    let mut manifest = ManifestBuilder::new("eval");
    manifest.input(model_path)?;
    manifest.input(kg_path)?;
    manifest.config("model", model_path.display().to_string());
    manifest.config("kg", kg_path.display().to_string());
    manifest.config("k", k);
    if let Some(out) = output {
        manifest.config("output", out.display().to_string());
    }

    let loaded = load_model(model_path)?;
    let kg = read_kg(kg_path)?;
    // ids in the model are positional; the graph must be the one it was
    // trained on (or an identically-ordered copy)
    if kg.entities().labels() != loaded.entity_labels.as_slice()
        || kg.relations().labels() != loaded.relation_labels.as_slice()
    {
        return Err(CliError::Data(format!(
            "{} does not match the model's vocabulary sidecars; evaluate against the kg the model was trained on",
            kg_path.display()
        )));
    }

    let mut report = eval_report(&loaded.model, &kg, k)?;
    report.timestamp = Some(timestamp_now());

    print!("{}", render::eval_table(&report));
    if let Some(out) = output {
        let mut json = serde_json::to_vec_pretty(&report)
            .map_err(|e| CliError::Data(e.to_string()))?;
        json.push(b'\n');
        atomic_write(out, &json)?;
    }
    manifest.write(output, manifest_override)?;
    Ok(())
}
