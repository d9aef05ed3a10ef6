//! Pipeline driver for the hybrid retrieval-generation report model.
//!
//! Subcommands chain through one output directory: `gen-data` writes the
//! dataset splits, `mine-templates` builds the template database and
//! vocabulary, `train` fits the model, and `evaluate`/`generate` score and
//! inspect it. All configuration lives in one JSON file (`--config`); the
//! seed is mandatory so every run is reproducible by construction.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
//! failure.

mod artifacts;
mod commands;
mod config;
mod errors;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hrgr_core::model::ActionConstraint;

use crate::artifacts::OutDir;
use crate::config::load_config;
use crate::errors::AppError;

#[derive(Parser)]
#[command(name = "hrgr", version, about = "Hybrid retrieval-generation report pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration JSON; defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// RNG seed; mandatory so runs never depend on wall-clock state.
    #[arg(long, value_name = "N")]
    seed: u64,

    /// Directory holding this run's inputs and outputs.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Overwrite outputs that already exist.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct ModelArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Restrict the action space instead of the full hybrid policy.
    #[arg(long, value_enum, default_value_t = Ablation::None)]
    ablation: Ablation,

    /// Skip the keyword-triggered normal-sentence completion pass.
    #[arg(long)]
    no_postprocess: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Ablation {
    /// Sentences may only be retrieved from the template database.
    RetrievalOnly,
    /// Every sentence is generated word-by-word.
    GenerationOnly,
    /// Full hybrid action space.
    None,
}

impl From<Ablation> for ActionConstraint {
    fn from(a: Ablation) -> Self {
        match a {
            Ablation::RetrievalOnly => ActionConstraint::RetrievalOnly,
            Ablation::GenerationOnly => ActionConstraint::GenerationOnly,
            Ablation::None => ActionConstraint::None,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the corpus and write disjoint train/val/test splits.
    GenData(CommonArgs),
    /// Mine the template database and vocabulary from the training split.
    MineTemplates(CommonArgs),
    /// Train: cross-entropy pretraining, then policy-gradient fine-tuning.
    Train(ModelArgs),
    /// Score a trained checkpoint on the test split.
    Evaluate {
        #[command(flatten)]
        model: ModelArgs,
        /// Checkpoint to score (defaults to <out>/best.ckpt).
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
    },
    /// Decode one sample and print sentences tagged [T:<group>] or [G].
    Generate {
        #[command(flatten)]
        model: ModelArgs,
        /// Checkpoint to decode with (defaults to <out>/best.ckpt).
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
        /// Sample id to decode (searched in test, val, then train).
        #[arg(value_name = "SAMPLE_ID")]
        id: String,
    },
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::GenData(args) => {
            let config = load_config(args.config.as_deref())?;
            let out = OutDir::new(&args.out)?;
            commands::gen_data(&config, args.seed, &out, args.force)
        }
        Command::MineTemplates(args) => {
            let config = load_config(args.config.as_deref())?;
            let out = OutDir::new(&args.out)?;
            commands::mine_templates(&config, &out, args.force)
        }
        Command::Train(args) => {
            let mut config = load_config(args.common.config.as_deref())?;
            config.train.postprocess.enabled &= !args.no_postprocess;
            let out = OutDir::new(&args.common.out)?;
            commands::train(
                &config,
                args.common.seed,
                &out,
                args.common.force,
                args.ablation.into(),
            )
        }
        Command::Evaluate { model, checkpoint } => {
            let mut config = load_config(model.common.config.as_deref())?;
            config.train.postprocess.enabled &= !model.no_postprocess;
            let out = OutDir::new(&model.common.out)?;
            commands::evaluate(
                &config,
                &out,
                model.common.force,
                model.ablation.into(),
                checkpoint.as_deref(),
            )
        }
        Command::Generate { model, checkpoint, id } => {
            let mut config = load_config(model.common.config.as_deref())?;
            config.train.postprocess.enabled &= !model.no_postprocess;
            let out = OutDir::new(&model.common.out)?;
            commands::generate(&config, &out, model.ablation.into(), checkpoint.as_deref(), &id)
        }
    }
}

fn main() -> ExitCode {
    // Die quietly when a pipe closes early (`hrgr mine-templates | head`)
    // instead of panicking on the failed print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("hrgr: {err}");
            err.exit_code()
        }
    }
}
