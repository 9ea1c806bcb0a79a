use std::path::{Path, PathBuf};

use skge_core::analytics::{project_2d, ProjectionMethod, ProjectionParams};
use skge_core::kg::{EntityId, Vocab};

use crate::cli::{CliError, MethodArg};
use crate::config::FileConfig;
use crate::io::{atomic_write, load_model, read_kg};
use crate::manifest::ManifestBuilder;
use crate::render;

pub struct Args {
    pub model: PathBuf,
    pub method: Option<MethodArg>,
    pub perplexity: Option<f64>,
    pub iterations: Option<usize>,
    pub learning_rate: Option<f64>,
    pub seed: Option<u64>,
    pub kg: Option<PathBuf>,
    pub entities: Option<Vec<String>>,
    pub output: PathBuf,
    pub svg: Option<PathBuf>,
}

pub fn run(
    args: Args,
    config: &FileConfig,
    manifest_override: Option<&Path>,
) -> Result<(), CliError> {
    let method_name: Option<String> = config.get("project", "method")?;
    let method = match args.method {
        Some(MethodArg::Tsne) => ProjectionMethod::Tsne,
        Some(MethodArg::Pca) => ProjectionMethod::Pca,
        None => match method_name.as_deref() {
            None | Some("tsne") => ProjectionMethod::Tsne,
            Some("pca") => ProjectionMethod::Pca,
            Some(other) => {
                return Err(CliError::Usage(format!(
                    "config project.method: unknown method {other:?}"
                )))
            }
        },
    };
    let defaults = ProjectionParams::default();
    let params = ProjectionParams {
        perplexity: config.resolve(args.perplexity, "project", "perplexity", defaults.perplexity)?,
        iterations: config.resolve(args.iterations, "project", "iterations", defaults.iterations)?,
        learning_rate: config.resolve(
            args.learning_rate,
            "project",
            "learning-rate",
            defaults.learning_rate,
        )?,
        early_exaggeration: defaults.early_exaggeration,
        exaggeration_iters: defaults.exaggeration_iters,
        seed: config.resolve(args.seed, "project", "seed", defaults.seed)?,
    };

    let mut manifest = ManifestBuilder::new("project");
    manifest.input(&args.model)?;
    manifest.seed(params.seed);
    manifest.config("model", args.model.display().to_string());
    manifest.config("method", method.name());
    manifest.config("perplexity", params.perplexity);
    manifest.config("iterations", params.iterations);
    manifest.config("learning-rate", params.learning_rate);
    manifest.config("seed", params.seed);
    manifest.config("output", args.output.display().to_string());

    let loaded = load_model(&args.model)?;
    let mut vocab = Vocab::new();
    for label in &loaded.entity_labels {
        vocab.intern(label).map_err(|e| CliError::Data(e.to_string()))?;
    }

    let ids: Vec<EntityId> = match &args.entities {
        None => (0..loaded.model.entity_count() as u32).map(EntityId).collect(),
        Some(labels) => labels
            .iter()
            .map(|label| {
                loaded
                    .entity_id(label)
                    .map(EntityId)
                    .ok_or_else(|| CliError::Data(format!("unknown entity {label:?}")))
            })
            .collect::<Result<_, _>>()?,
    };

    let kg = match &args.kg {
        Some(path) => {
            manifest.input(path)?;
            manifest.config("kg", path.display().to_string());
            Some(read_kg(path)?)
        }
        None => None,
    };
    if let Some(kg) = &kg {
        if kg.entities().labels() != loaded.entity_labels.as_slice() {
            return Err(CliError::Data(format!(
                "{} does not match the model's vocabulary sidecars",
                args.kg.as_ref().expect("kg flag set").display()
            )));
        }
    }

    let projection = project_2d(&loaded.model, &vocab, &ids, method, &params, kg.as_ref())?;

    atomic_write(&args.output, render::projection_csv(&projection).as_bytes())?;
    println!(
        "projected {} entities with {} to {}",
        projection.points.len(),
        projection.method,
        args.output.display()
    );
    if let Some(svg_path) = &args.svg {
        atomic_write(svg_path, render::projection_svg(&projection).as_bytes())?;
        println!("scatter plot written to {}", svg_path.display());
    }
    manifest.write(Some(&args.output), manifest_override)?;
    Ok(())
}
