//! `tasknlp` — train, evaluate and run the to-do interpreter.
//!
//! Exit codes: 0 success, 2 input error, 3 training or model error.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "tasknlp", version, about = "Interpret short to-do utterances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct ResourceArgs {
    /// Gazetteer directory of TSV lists, or a compiled matcher artifact
    #[arg(long)]
    gazetteers: Option<PathBuf>,
    /// POS lexicon TSV
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Color word list, one word per line
    #[arg(long)]
    colors: Option<PathBuf>,
    /// Word vector file in text format
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// TOML config file supplying defaults; flags win
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Tracked lemmas per agent in the word statistics
    #[arg(long)]
    n: Option<usize>,
    /// Boosting rounds
    #[arg(long)]
    rounds: Option<usize>,
    /// Boosting shrinkage
    #[arg(long)]
    shrinkage: Option<f64>,
    /// Fold-split seed
    #[arg(long)]
    seed: Option<u64>,
    /// Agents with fewer records are pruned
    #[arg(long)]
    min_agent_count: Option<usize>,
    /// Optional gold first-token tags (`id \t tag` per line)
    #[arg(long)]
    first_tags: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compile gazetteer lists into a matcher artifact
    CompileNer {
        #[command(flatten)]
        resources: ResourceArgs,
        /// Output artifact path
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the model bundle from an annotated corpus
    Train {
        #[command(flatten)]
        resources: ResourceArgs,
        #[command(flatten)]
        train: TrainArgs,
        /// Bundle output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify one utterance with a trained bundle
    Classify {
        #[command(flatten)]
        resources: ResourceArgs,
        /// Bundle directory written by `train`
        #[arg(long)]
        bundle: PathBuf,
        /// The utterance to classify
        text: String,
    },
    /// Cross-validate the agent classifier and evaluate argument extraction
    Eval {
        #[command(flatten)]
        resources: ResourceArgs,
        #[command(flatten)]
        train: TrainArgs,
        /// Evaluate a fixed bundle on the whole corpus instead of
        /// retraining per fold
        #[arg(long)]
        bundle: Option<PathBuf>,
        /// Number of folds
        #[arg(long)]
        folds: Option<usize>,
        /// Report output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Fleiss' kappa over an annotation matrix file
    Kappa {
        /// TSV: header of category names, then one row of counts per task
        file: PathBuf,
    },
    /// Corpus diagnostics: agent distribution, exceptions, elected verbs
    Stats {
        #[command(flatten)]
        resources: ResourceArgs,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::CompileNer { resources, out } => commands::compile_ner(&resources, &out),
        Command::Train {
            resources,
            train,
            out,
        } => commands::train(&resources, &train, &out),
        Command::Classify {
            resources,
            bundle,
            text,
        } => commands::classify(&resources, &bundle, &text),
        Command::Eval {
            resources,
            train,
            bundle,
            folds,
            out,
        } => commands::eval(&resources, &train, bundle.as_deref(), folds, &out),
        Command::Kappa { file } => commands::kappa(&file),
        Command::Stats { resources, corpus } => commands::stats(&resources, corpus.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
