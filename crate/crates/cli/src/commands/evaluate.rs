//! `evaluate`: score a trained checkpoint on the test split and write the
//! metrics and per-sample predictions.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use hrgr_core::model::{load_checkpoint, ActionConstraint};
use hrgr_core::training::{collect_term_list, evaluate_split, EvalOutcome};

use crate::artifacts::{write_json, OutDir};
use crate::config::{echo_config, RunConfig};
use crate::errors::AppError;

pub fn evaluate(
    config: &RunConfig,
    out: &OutDir,
    force: bool,
    constraint: ActionConstraint,
    checkpoint: Option<&Path>,
) -> Result<(), AppError> {
    let outputs = [out.metrics(), out.metrics_raw(), out.predictions()];
    out.refuse_overwrite(&outputs, force)?;

    let train_split = out.load_split("train")?;
    let val_split = out.load_split("val")?;
    let test_split = out.load_split("test")?;
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
    let (params, meta) = load_checkpoint(&ckpt_path, Some(dims))?;

    let term_list = collect_term_list(&[&train_split, &val_split, &test_split]);
    let outcome: EvalOutcome = evaluate_split(
        &params,
        &test_split,
        &templates,
        &vocab,
        &config.train,
        constraint,
        &term_list,
    )?;

    write_json(&out.metrics(), &outcome.metrics)?;
    if let Some(raw) = &outcome.raw_metrics {
        write_json(&out.metrics_raw(), raw)?;
    }
    let pred_path = out.predictions();
    let file = File::create(&pred_path)
        .map_err(|e| AppError::data(format!("cannot write {}: {e}", pred_path.display())))?;
    let mut w = BufWriter::new(file);
    for sample in &outcome.outputs {
        let line = serde_json::to_string(sample)
            .map_err(|e| AppError::data(format!("cannot serialize prediction: {e}")))?;
        writeln!(w, "{line}")
            .map_err(|e| AppError::data(format!("cannot write {}: {e}", pred_path.display())))?;
    }
    w.flush()
        .map_err(|e| AppError::data(format!("cannot write {}: {e}", pred_path.display())))?;
    echo_config(out.root(), config)?;

    let m = &outcome.metrics;
    println!(
        "checkpoint {} (epoch {}, seed {})",
        ckpt_path.display(),
        meta.epoch,
        meta.seed
    );
    println!(
        "test CIDEr {:.4}  BLEU-1 {:.4}  BLEU-4 {:.4}  ROUGE-L {:.4}",
        m.cider, m.bleu1, m.bleu4, m.rouge_l
    );
    println!(
        "terms: precision {:.4}  avg false positives {:.4}",
        m.precision, m.afp
    );
    println!(
        "action mix: {:.1}% retrieved / {:.1}% generated over {:.2} sentences per report",
        100.0 * outcome.mix.retrieval_fraction,
        100.0 * outcome.mix.generation_fraction,
        outcome.mix.mean_sentences
    );
    Ok(())
}
