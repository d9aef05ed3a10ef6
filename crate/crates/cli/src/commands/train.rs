//! `train`: cross-entropy pretraining followed by policy-gradient
//! fine-tuning, with best-validation checkpoints for both phases.

use hrgr_core::model::{save_checkpoint, ActionConstraint, CheckpointMeta, ModelParameters};
use hrgr_core::numerics::Rng;
use hrgr_core::training::{append_logs, train_full, EpochLog, Phase};

use crate::artifacts::OutDir;
use crate::config::{echo_config, RunConfig};
use crate::errors::AppError;

/// Epoch whose parameters each phase's checkpoint holds, mirroring the
/// driver's selection rule (first maximum for XE; RL must strictly beat
/// the XE best).
fn selected_epochs(logs: &[EpochLog]) -> (usize, usize, Phase) {
    let mut xe_best: Option<(usize, f64)> = None;
    for log in logs.iter().filter(|l| l.phase == Phase::Xe) {
        if xe_best.map_or(true, |(_, c)| log.val_cider > c) {
            xe_best = Some((log.epoch, log.val_cider));
        }
    }
    let (xe_epoch, xe_cider) = xe_best.unwrap_or((0, f64::NEG_INFINITY));
    let mut best = (xe_epoch, xe_cider, Phase::Xe);
    for log in logs.iter().filter(|l| l.phase == Phase::Rl) {
        if log.val_cider > best.1 {
            best = (log.epoch, log.val_cider, Phase::Rl);
        }
    }
    (xe_epoch, best.0, best.2)
}

pub fn train(
    config: &RunConfig,
    seed: u64,
    out: &OutDir,
    force: bool,
    constraint: ActionConstraint,
) -> Result<(), AppError> {
    let outputs = [out.checkpoint("xe"), out.checkpoint("best"), out.train_log()];
    out.refuse_overwrite(&outputs, force)?;

    let train_split = out.load_split("train")?;
    let val_split = out.load_split("val")?;
    let templates = out.load_templates()?;
    let vocab = out.load_vocab()?;

    if let Some(sample) = train_split.first() {
        let rows = sample.features.len();
        let cols = sample.features.first().map_or(0, |r| r.len());
        if rows != config.synth.regions || cols != config.synth.feat_dim {
            return Err(AppError::data(format!(
                "dataset features are {rows}x{cols} but the config expects {}x{}; \
                 regenerate the data or fix synth.regions/synth.feat_dim",
                config.synth.regions, config.synth.feat_dim
            )));
        }
    }

    let dims = config.dims(vocab.len(), templates.len());
    let mut rng = Rng::new(seed);
    let init = ModelParameters::init(dims, &mut rng);
    eprintln!(
        "training {dims} on {} samples ({} XE + {} RL epochs)",
        train_split.len(),
        config.train.xe_epochs,
        config.train.rl_epochs
    );

    let run = train_full(
        init,
        &train_split,
        &val_split,
        &templates,
        &vocab,
        &config.train,
        constraint,
        &mut rng,
    )?;

    for log in &run.logs {
        eprintln!(
            "epoch {:>3} [{}] loss {:>9.4}  val CIDEr {:.4}  retrieval {:.2}  ({:.1}s)",
            log.epoch,
            match log.phase {
                Phase::Xe => "xe",
                Phase::Rl => "rl",
            },
            log.loss,
            log.val_cider,
            log.retrieval_fraction,
            log.wallclock_s
        );
    }

    let hash = config.hash();
    let (xe_epoch, best_epoch, best_phase) = selected_epochs(&run.logs);
    save_checkpoint(
        &out.checkpoint("xe"),
        &run.xe_params,
        &CheckpointMeta { epoch: xe_epoch, seed, config_hash: hash.clone() },
    )?;
    save_checkpoint(
        &out.checkpoint("best"),
        &run.params,
        &CheckpointMeta { epoch: best_epoch, seed, config_hash: hash },
    )?;

    let log_path = out.train_log();
    if log_path.exists() {
        std::fs::remove_file(&log_path)
            .map_err(|e| AppError::data(format!("cannot replace {}: {e}", log_path.display())))?;
    }
    append_logs(&log_path, &run.logs)?;
    echo_config(out.root(), config)?;

    println!(
        "saved {} (epoch {} of {} phase) and {} (XE epoch {})",
        out.checkpoint("best").display(),
        best_epoch,
        match best_phase {
            Phase::Xe => "xe",
            Phase::Rl => "rl",
        },
        out.checkpoint("xe").display(),
        xe_epoch
    );
    Ok(())
}
