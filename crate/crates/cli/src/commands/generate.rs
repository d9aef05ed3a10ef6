//! `generate`: decode one report and print each sentence with its source
//! tag — `[T:<group>]` for a retrieved template, `[G]` for generated text.

use std::path::Path;

use hrgr_core::model::{load_checkpoint, rollout, ActionConstraint, RolloutOptions, SentenceSource};
use hrgr_core::numerics::Rng;

use crate::artifacts::OutDir;
use crate::config::RunConfig;
use crate::errors::AppError;

pub fn generate(
    config: &RunConfig,
    out: &OutDir,
    constraint: ActionConstraint,
    checkpoint: Option<&Path>,
    sample_id: &str,
) -> Result<(), AppError> {
    let templates = out.load_templates()?;
    let vocab = out.load_vocab()?;
    let ckpt_path = checkpoint
        .map(Path::to_path_buf)
        .unwrap_or_else(|| out.checkpoint("best"));
    if !ckpt_path.exists() {
        return Err(AppError::data(format!(
            "{} not found; run train first",
            ckpt_path.display()
        )));
    }
    let dims = config.dims(vocab.len(), templates.len());
    let (params, _) = load_checkpoint(&ckpt_path, Some(dims))?;

    let mut sample = None;
    for split in ["test", "val", "train"] {
        if let Some(found) = out.load_split(split)?.into_iter().find(|s| s.id == sample_id) {
            sample = Some((split, found));
            break;
        }
    }
    let Some((split, sample)) = sample else {
        return Err(AppError::data(format!(
            "sample id '{sample_id}' not found in any split"
        )));
    };

    let opts = RolloutOptions {
        constraint,
        stop_threshold: config.train.stop_threshold,
        ..RolloutOptions::greedy(config.train.limits)
    };
    // Greedy decoding never consults the generator's RNG.
    let (_, trace) = rollout(
        &params,
        &sample.features_array(),
        &templates,
        &vocab,
        &opts,
        &mut Rng::new(0),
    )?;

    eprintln!("sample {sample_id} (from the {split} split)");
    for sentence in &trace.sentences {
        let tag = match sentence.source {
            SentenceSource::Retrieved(group) => format!("[T:{group}]"),
            SentenceSource::Generated => "[G]".to_string(),
        };
        println!("{tag} {}", sentence.tokens.join(" "));
    }
    eprintln!("gold report:");
    for sentence in &sample.report {
        eprintln!("      {sentence}");
    }
    Ok(())
}
