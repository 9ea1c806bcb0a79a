//! Argument parsing, error-to-exit-code mapping, and dispatch.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 numeric
//! failure (NaN abort during training).

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use skge_core::analytics::AnalyticsError;
use skge_core::eval::EvalError;
use skge_core::kg::KgError;
use skge_core::model::{Algorithm, ModelError, Norm};
use skge_core::scene::SceneError;
use skge_core::train::TrainError;

use crate::commands;
use crate::config::FileConfig;
use crate::io::IoError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<KgError> for CliError {
    fn from(e: KgError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SceneError> for CliError {
    fn from(e: SceneError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::NumericFailure { .. } => CliError::Numeric(e.to_string()),
            TrainError::BadConfig(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::BadK { .. } => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<AnalyticsError> for CliError {
    fn from(e: AnalyticsError) -> Self {
        match e {
            AnalyticsError::BadK { .. } => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AlgoArg {
    Transe,
    Rescal,
    Hole,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Transe => Algorithm::TransE,
            AlgoArg::Rescal => Algorithm::Rescal,
            AlgoArg::Hole => Algorithm::HolE,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NormArg {
    L1,
    L2,
}

impl From<NormArg> for Norm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::L1 => Norm::L1,
            NormArg::L2 => Norm::L2,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Tsne,
    Pca,
}

#[derive(Debug, Parser)]
#[command(
    name = "skge",
    version,
    about = "Scene knowledge-graph embeddings: generate, train, evaluate, query, project"
)]
pub struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Where to write the run manifest (default: next to the output).
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a knowledge graph from scene annotations and an ontology.
    #[command(name = "gen-kg")]
    GenKg {
        /// Scene dataset JSON.
        scenes: PathBuf,
        /// Ontology config JSON (taxonomy + event classes).
        ontology: PathBuf,
        /// Output triples TSV.
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
    },
    /// Train embeddings on a triples file.
    Train {
        /// Input triples TSV.
        kg: PathBuf,
        #[arg(long, value_enum)]
        algo: Option<AlgoArg>,
        /// Embedding dimension.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        /// SGD learning rate.
        #[arg(long)]
        lr: Option<f64>,
        /// Margin of the ranking loss.
        #[arg(long)]
        margin: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (>1 is hogwild and nondeterministic).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, value_name = "N")]
        batch_size: Option<usize>,
        /// Negative samples per positive.
        #[arg(long)]
        negatives: Option<usize>,
        /// L2 weight decay on touched rows.
        #[arg(long)]
        l2_reg: Option<f64>,
        /// TransE distance norm.
        #[arg(long, value_enum)]
        norm: Option<NormArg>,
        /// Project entity rows onto the unit ball after updates
        /// (default: on for transe, off otherwise).
        #[arg(long)]
        normalize_entities: Option<bool>,
        /// Output model file; sidecars entities.txt/relations.txt land
        /// next to it.
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
    },
    /// Evaluate a model with the intrinsic metrics.
    Eval {
        model: PathBuf,
        kg: PathBuf,
        /// Coherence neighborhood size.
        #[arg(long)]
        k: Option<usize>,
        /// Write the report as JSON here (table always goes to stdout).
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Rank scene pairs by cosine similarity.
    Similar {
        model: PathBuf,
        /// Comma-separated scene entity labels.
        #[arg(long, value_delimiter = ',', required = true)]
        scenes: Vec<String>,
        #[arg(long = "top-k")]
        top_k: Option<usize>,
        /// Write the ranking as JSON here.
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Nearest neighbors of one entity.
    Neighbors {
        model: PathBuf,
        #[arg(long)]
        entity: String,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Project embeddings to 2D (exact t-SNE or PCA).
    Project {
        model: PathBuf,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long)]
        perplexity: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Triples TSV used to attach class labels to points.
        #[arg(long, value_name = "FILE")]
        kg: Option<PathBuf>,
        /// Comma-separated entity labels to project (default: all).
        #[arg(long, value_delimiter = ',')]
        entities: Option<Vec<String>>,
        /// Output CSV (label,x,y,class).
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
        /// Also write a scatter-plot SVG here.
        #[arg(long, value_name = "FILE")]
        svg: Option<PathBuf>,
    },
    /// Triple/entity/relation counts of a triples file.
    Stats {
        kg: PathBuf,
        /// Write the counts as JSON here.
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
}

/// Parses argv and runs; returns the process exit code.
pub fn main_with_exit_code() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let config = FileConfig::load(cli.config.as_deref())?;
    let manifest_override = cli.manifest.as_deref();
    match cli.command {
        Command::GenKg {
            scenes,
            ontology,
            output,
        } => commands::gen_kg::run(&scenes, &ontology, &output, &config, manifest_override),
        Command::Train {
            kg,
            algo,
            dim,
            epochs,
            lr,
            margin,
            seed,
            threads,
            batch_size,
            negatives,
            l2_reg,
            norm,
            normalize_entities,
            output,
        } => commands::train::run(
            commands::train::Args {
                kg,
                algo,
                dim,
                epochs,
                lr,
                margin,
                seed,
                threads,
                batch_size,
                negatives,
                l2_reg,
                norm,
                normalize_entities,
                output,
            },
            &config,
            manifest_override,
        ),
        Command::Eval {
            model,
            kg,
            k,
            output,
        } => commands::eval_cmd::run(&model, &kg, k, output.as_deref(), &config, manifest_override),
        Command::Similar {
            model,
            scenes,
            top_k,
            output,
        } => commands::similar::run(
            &model,
            &scenes,
            top_k,
            output.as_deref(),
            &config,
            manifest_override,
        ),
        Command::Neighbors { model, entity, k } => {
            commands::neighbors::run(&model, &entity, k, &config, manifest_override)
        }
        Command::Project {
            model,
            method,
            perplexity,
            iterations,
            learning_rate,
            seed,
            kg,
            entities,
            output,
            svg,
        } => commands::project::run(
            commands::project::Args {
                model,
                method,
                perplexity,
                iterations,
                learning_rate,
                seed,
                kg,
                entities,
                output,
                svg,
            },
            &config,
            manifest_override,
        ),
        Command::Stats { kg, output } => {
            commands::stats::run(&kg, output.as_deref(), &config, manifest_override)
        }
    }
}
