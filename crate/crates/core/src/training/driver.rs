//! End-to-end training: cross-entropy pretraining followed by
//! policy-gradient fine-tuning, with best-validation checkpointing in
//! both phases.

use std::time::Instant;

use crate::corpus::{ReportSample, TemplateDatabase, Vocabulary};
use crate::error::TrainError;
use crate::metrics::NgramStats;
use crate::model::{ActionConstraint, ModelParameters};
use crate::numerics::{Optimizer, Rng};

use super::config::TrainConfig;
use super::evaluate::{collect_term_list, evaluate_split};
use super::logs::{EpochLog, Phase};
use super::rl::{train_rl_epoch, Baselines};
use super::xe::train_xe;

/// Outcome of a full training run.
pub struct TrainRun {
    /// Best-validation checkpoint from the cross-entropy phase.
    pub xe_params: ModelParameters,
    /// Final parameters: the best-validation checkpoint across the
    /// fine-tuning phase (falls back to `xe_params` when fine-tuning is
    /// skipped or never improves validation).
    pub params: ModelParameters,
    pub logs: Vec<EpochLog>,
}

/// Train from the given initialization. The constraint restricts action
/// choices during both supervision and decoding (used by ablations).
#[allow(clippy::too_many_arguments)]
pub fn train_full(
    init: ModelParameters,
    train: &[ReportSample],
    val: &[ReportSample],
    templates: &TemplateDatabase,
    vocab: &Vocabulary,
    config: &TrainConfig,
    constraint: ActionConstraint,
    rng: &mut Rng,
) -> Result<TrainRun, TrainError> {
    config.validate()?;
    let mut params = init;
    let mut logs = train_xe(
        &mut params,
        train,
        val,
        templates,
        vocab,
        config,
        constraint,
        rng,
    )?;
    let xe_params = params.clone();

    if config.rl_epochs > 0 {
        let term_list = collect_term_list(&[train, val]);
        let train_refs: Vec<Vec<String>> = train.iter().map(|s| s.flat_tokens()).collect();
        let stats = NgramStats::build(&train_refs);
        let mut optimizer = Optimizer::new(config.optimizer, config.lr_rl, config.grad_clip);
        let mut baselines = Baselines::default();

        // The XE phase left `params` at its best-validation checkpoint, so
        // its score is the bar fine-tuning has to beat.
        let xe_val = logs
            .iter()
            .filter(|l| l.phase == Phase::Xe)
            .map(|l| l.val_cider)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut best = (xe_val, params.clone());

        for epoch in 1..=config.rl_epochs {
            let started = Instant::now();
            let stats_epoch = train_rl_epoch(
                &mut params,
                train,
                templates,
                vocab,
                config,
                &stats,
                &mut optimizer,
                &mut baselines,
                rng,
            )?;
            let outcome =
                evaluate_split(&params, val, templates, vocab, config, constraint, &term_list)?;
            let log = EpochLog {
                epoch,
                phase: Phase::Rl,
                loss: stats_epoch.mean_policy_loss,
                val_cider: outcome.metrics.cider,
                val_bleu1: outcome.metrics.bleu1,
                retrieval_fraction: outcome.mix.retrieval_fraction,
                mean_sentences: outcome.mix.mean_sentences,
                wallclock_s: started.elapsed().as_secs_f64(),
            };
            if log.val_cider > best.0 {
                best = (log.val_cider, params.clone());
            }
            logs.push(log);
        }
        params = best.1;
    }

    Ok(TrainRun { xe_params, params, logs })
}
