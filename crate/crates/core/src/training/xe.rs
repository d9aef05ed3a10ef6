//! Cross-entropy pretraining: teacher-forced supervision for the stop
//! gate, the retrieval policy, and the word generator.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::corpus::{
    default_stop_words, normalize_sentence, ReportSample, TemplateDatabase, Vocabulary, BOS, EOS,
};
use crate::error::{NumericsError, TrainError};
use crate::model::{ActionConstraint, Forward, ModelParameters};
use crate::numerics::{Gradients, NodeId, Optimizer, Rng};

use super::config::TrainConfig;
use super::evaluate::{collect_term_list, evaluate_split};
use super::logs::{EpochLog, Phase};

/// Precomputed supervision context shared across samples.
pub struct XeContext {
    stop_words: Vec<String>,
    /// Normalized sentence form -> 1-based retrieval action.
    lookup: BTreeMap<String, usize>,
    /// Force every action target to this value (ablations).
    forced_action: Option<usize>,
}

impl XeContext {
    pub fn new(templates: &TemplateDatabase, constraint: ActionConstraint) -> Self {
        let stop_words = default_stop_words();
        let lookup = templates.action_lookup(&stop_words);
        let forced_action = match constraint {
            ActionConstraint::GenerationOnly => Some(0),
            _ => None,
        };
        XeContext { stop_words, lookup, forced_action }
    }

    /// Supervision target for one gold sentence: the matching template
    /// group's action, or 0 (generate) when nothing matches.
    pub fn action_target(&self, sentence: &str) -> usize {
        if let Some(a) = self.forced_action {
            return a;
        }
        let key = normalize_sentence(sentence, &self.stop_words);
        self.lookup.get(&key).copied().unwrap_or(0)
    }
}

/// Build the teacher-forced loss for one sample on a fresh tape:
///
/// sum over gold sentences of stop-gate BCE + retrieval CE, plus word CE
/// (including the end marker) for sentences whose action target is 0,
/// plus the final stop step's BCE.
pub fn sample_xe_loss(
    params: &ModelParameters,
    sample: &ReportSample,
    ctx: &XeContext,
    vocab: &Vocabulary,
) -> Result<(Forward, NodeId), TrainError> {
    let mut fw = Forward::new(params);
    let enc = fw.encode(&sample.features_array())?;
    let mut state = fw.topic_hidden();
    let mut terms: Vec<NodeId> = Vec::new();

    for (sentence, tokens) in sample.report.iter().zip(sample.sentence_tokens()) {
        let step = fw.topic_step(&enc, &mut state)?;
        // Stop target is 0 for every real sentence.
        let lp_continue = fw.log_one_minus(step.z);
        terms.push(fw.tape.affine(lp_continue, -1.0, 0.0));

        let action_probs = fw.action_probs(step.q)?;
        let target = ctx.action_target(sentence);
        let lp_action = fw.logprob(action_probs, target)?;
        terms.push(fw.tape.affine(lp_action, -1.0, 0.0));

        if target == 0 {
            let ids = vocab.encode(&tokens);
            let mut h = fw.zeros(fw.dims.d_hidden);
            let mut prev = BOS;
            for &tok in ids.iter().chain(std::iter::once(&EOS)) {
                let (word_probs, h_next) = fw.gen_step(&enc, step.q, prev, h)?;
                let lp = fw.logprob(word_probs, tok as usize)?;
                terms.push(fw.tape.affine(lp, -1.0, 0.0));
                prev = tok;
                h = h_next;
            }
        }
    }

    // One step past the last sentence with stop target 1.
    let step = fw.topic_step(&enc, &mut state)?;
    let lp_stop = fw.tape.log(step.z);
    terms.push(fw.tape.affine(lp_stop, -1.0, 0.0));

    let stacked = fw.tape.concat(&terms)?;
    let loss = fw.tape.sum(stacked);
    Ok((fw, loss))
}

/// Run cross-entropy pretraining. Parameters are updated in place and end
/// at the best-validation-CIDEr epoch; one log entry is emitted per
/// epoch.
#[allow(clippy::too_many_arguments)]
pub fn train_xe(
    params: &mut ModelParameters,
    train: &[ReportSample],
    val: &[ReportSample],
    templates: &TemplateDatabase,
    vocab: &Vocabulary,
    config: &TrainConfig,
    constraint: ActionConstraint,
    rng: &mut Rng,
) -> Result<Vec<EpochLog>, TrainError> {
    config.validate()?;
    let ctx = XeContext::new(templates, constraint);
    let term_list = collect_term_list(&[train, val]);
    let mut optimizer =
        Optimizer::new(config.optimizer, config.lr_xe, config.grad_clip);
    let mut logs = Vec::with_capacity(config.xe_epochs);
    let mut best: Option<(f64, ModelParameters)> = None;

    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=config.xe_epochs {
        let started = Instant::now();
        rng.shuffle(&mut order);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut grads = Gradients::default();
            let weight = 1.0 / batch.len() as f64;
            for &idx in batch {
                let sample = &train[idx];
                let (fw, loss) = sample_xe_loss(params, sample, &ctx, vocab)?;
                let value = fw.tape.value(loss).item();
                if !value.is_finite() {
                    return Err(NumericsError::NonFiniteLoss {
                        context: format!("xe epoch {epoch}, sample {}", sample.id),
                    }
                    .into());
                }
                loss_sum += value;
                grads.add_scaled(&fw.tape.backward(loss)?, weight);
            }
            optimizer.step(&mut params.params, &grads)?;
        }

        let outcome =
            evaluate_split(params, val, templates, vocab, config, constraint, &term_list)?;
        let log = EpochLog {
            epoch,
            phase: Phase::Xe,
            loss: loss_sum / train.len() as f64,
            val_cider: outcome.metrics.cider,
            val_bleu1: outcome.metrics.bleu1,
            retrieval_fraction: outcome.mix.retrieval_fraction,
            mean_sentences: outcome.mix.mean_sentences,
            wallclock_s: started.elapsed().as_secs_f64(),
        };
        if best.as_ref().map_or(true, |(c, _)| log.val_cider > *c) {
            best = Some((log.val_cider, params.clone()));
        }
        logs.push(log);
    }

    if let Some((_, best_params)) = best {
        *params = best_params;
    }
    Ok(logs)
}
