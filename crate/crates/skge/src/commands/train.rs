use std::path::{Path, PathBuf};

use skge_core::model::{Algorithm, ModelConfig};
use skge_core::train::{init_model, train, EpochRecord, TrainConfig, TrainObserver};

use crate::cli::{AlgoArg, CliError, NormArg};
use crate::config::{resolve_threads, FileConfig};
use crate::io::{read_kg, save_model};
use crate::manifest::ManifestBuilder;

pub struct Args {
    pub kg: PathBuf,
    pub algo: Option<AlgoArg>,
    pub dim: Option<usize>,
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub margin: Option<f64>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub batch_size: Option<usize>,
    pub negatives: Option<usize>,
    pub l2_reg: Option<f64>,
    pub norm: Option<NormArg>,
    pub normalize_entities: Option<bool>,
    pub output: PathBuf,
}

/// Logs one line per epoch to stderr.
struct StderrObserver {
    epochs: usize,
}

impl TrainObserver for StderrObserver {
    fn warning(&mut self, message: &str) {
        eprintln!("warning: {message}");
    }

    fn epoch_done(&mut self, epoch: usize, record: &EpochRecord) {
        eprintln!(
            "epoch {:>4}/{} loss={:.6} violations={:.3} ({:.2}s)",
            epoch + 1,
            self.epochs,
            record.mean_loss,
            record.violation_rate,
            record.wall_time_secs
        );
    }
}

pub fn run(
    args: Args,
    config: &FileConfig,
    manifest_override: Option<&Path>,
) -> Result<(), CliError> {
    let algo_name: Option<String> = config.get("train", "algo")?;
    let algorithm: Algorithm = match args.algo {
        Some(a) => a.into(),
        None => match algo_name {
            Some(name) => name
                .parse()
                .map_err(|e: String| CliError::Usage(format!("config train.algo: {e}")))?,
            None => Algorithm::TransE,
        },
    };
    let defaults = TrainConfig::defaults_for(algorithm);

    let dim = config.resolve(args.dim, "train", "dim", 32)?;
    let seed = config.resolve(args.seed, "train", "seed", defaults.seed)?;
    let norm_flag: Option<String> = config.get("train", "norm")?;
    let norm = match args.norm {
        Some(n) => n.into(),
        None => match norm_flag {
            Some(name) => name
                .parse()
                .map_err(|e: String| CliError::Usage(format!("config train.norm: {e}")))?,
            None => skge_core::model::Norm::L2,
        },
    };

    let tcfg = TrainConfig {
        epochs: config.resolve(args.epochs, "train", "epochs", defaults.epochs)?,
        batch_size: config.resolve(args.batch_size, "train", "batch-size", defaults.batch_size)?,
        learning_rate: config.resolve(args.lr, "train", "lr", defaults.learning_rate)?,
        margin: config.resolve(args.margin, "train", "margin", defaults.margin)?,
        negatives_per_positive: config.resolve(
            args.negatives,
            "train",
            "negatives",
            defaults.negatives_per_positive,
        )?,
        normalize_entities: config.resolve(
            args.normalize_entities,
            "train",
            "normalize-entities",
            defaults.normalize_entities,
        )?,
        l2_reg: config.resolve(args.l2_reg, "train", "l2-reg", defaults.l2_reg)?,
        seed,
        threads: resolve_threads(args.threads, config, "train")?,
        rescal_param_budget: config.resolve(
            None,
            "train",
            "rescal-param-budget",
            defaults.rescal_param_budget,
        )?,
    };

    let mut manifest = ManifestBuilder::new("train");
    manifest.input(&args.kg)?;
    manifest.seed(seed);
    manifest.config("kg", args.kg.display().to_string());
    manifest.config("algo", algorithm.name());
    manifest.config("dim", dim);
    manifest.config("epochs", tcfg.epochs);
    manifest.config("lr", tcfg.learning_rate);
    manifest.config("margin", tcfg.margin);
    manifest.config("batch-size", tcfg.batch_size);
    manifest.config("negatives", tcfg.negatives_per_positive);
    manifest.config("normalize-entities", tcfg.normalize_entities);
    manifest.config("l2-reg", tcfg.l2_reg);
    manifest.config("seed", tcfg.seed);
    manifest.config("threads", tcfg.threads);
    manifest.config(
        "norm",
        match norm {
            skge_core::model::Norm::L1 => "l1",
            skge_core::model::Norm::L2 => "l2",
        },
    );
    manifest.config("output", args.output.display().to_string());

    let kg = read_kg(&args.kg)?;
    let mcfg = ModelConfig::new(algorithm, dim, seed)?.with_norm(norm);
    let model = init_model(mcfg, &kg)?;
    let mut observer = StderrObserver {
        epochs: tcfg.epochs,
    };
    let (trained, history) = train(model, &kg, &tcfg, &mut observer)?;

    save_model(
        &args.output,
        &trained,
        kg.entities().labels(),
        kg.relations().labels(),
    )?;

    let first = history.epochs.first();
    let last = history.epochs.last();
    println!(
        "trained {} d={dim} on {} triples ({} entities, {} relations)",
        algorithm.name(),
        kg.triple_count(),
        kg.entity_count(),
        kg.relation_count()
    );
    if let (Some(first), Some(last)) = (first, last) {
        println!(
            "mean loss {:.6} -> {:.6} over {} epochs",
            first.mean_loss,
            last.mean_loss,
            history.epochs.len()
        );
    }
    println!("model written to {}", args.output.display());

    manifest.write(Some(&args.output), manifest_override)?;
    Ok(())
}
