//! Policy-gradient fine-tuning.
//!
//! Each sampled report contributes, per sentence, a retrieval-policy term
//! weighted by the discounted sentence-level return, word-generator terms
//! weighted by discounted word-level returns (only for generated
//! sentences), and optionally stop-gate terms sharing the sentence-level
//! return. Gradients are restricted to the retrieval policy, the word
//! generator, and (optionally) the stop gate; everything upstream stays
//! frozen at its pretrained values.

use crate::corpus::{ReportSample, TemplateDatabase, Vocabulary};
use crate::error::{NumericsError, TrainError};
use crate::metrics::{compute_reward_trace, CiderOpts, NgramStats, RewardTrace};
use crate::model::{
    rollout, EpisodeTrace, Forward, ModelParameters, RolloutOptions, SentenceSource,
};
use crate::numerics::{Gradients, NodeId, Optimizer, Rng};

use super::config::TrainConfig;

/// Exponential-moving-average reward baselines.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Baselines {
    pub sentence: f64,
    pub word: f64,
}

impl Baselines {
    fn update(&mut self, decay: f64, rewards: &RewardTrace) {
        if !rewards.returns_r.is_empty() {
            let mean =
                rewards.returns_r.iter().sum::<f64>() / rewards.returns_r.len() as f64;
            self.sentence = decay * self.sentence + (1.0 - decay) * mean;
        }
        let words: Vec<f64> = rewards.returns_g.iter().flatten().copied().collect();
        if !words.is_empty() {
            let mean = words.iter().sum::<f64>() / words.len() as f64;
            self.word = decay * self.word + (1.0 - decay) * mean;
        }
    }
}

/// Reward and behavior statistics for one fine-tuning epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlEpochStats {
    /// Mean policy surrogate loss over samples that produced any term.
    pub mean_policy_loss: f64,
    /// Mean per-sentence delta reward across the epoch.
    pub mean_sentence_reward: f64,
    pub empty_reports: usize,
    pub total_reports: usize,
    /// True when every sampled rollout stopped before its first sentence.
    pub all_stopped: bool,
    /// Fraction of sampled sentences drawn from templates.
    pub retrieval_fraction: f64,
}

/// Assemble the policy surrogate loss for one sampled episode. Returns
/// `None` when the episode produced no trainable decision (an immediate
/// stop with stop-gate updates disabled).
pub fn policy_loss(
    fw: &mut Forward,
    trace: &EpisodeTrace,
    rewards: &RewardTrace,
    config: &TrainConfig,
    baselines: Baselines,
) -> Result<Option<NodeId>, NumericsError> {
    let mut terms: Vec<NodeId> = Vec::new();
    for (i, rec) in trace.sentences.iter().enumerate() {
        let adv_sentence = rewards.returns_r[i] - baselines.sentence;
        terms.push(fw.tape.affine(rec.action_logprob, -adv_sentence, 0.0));
        if config.rl_updates_z {
            terms.push(fw.tape.affine(rec.continue_logprob, -adv_sentence, 0.0));
        }
        if config.rl_entropy_bonus > 0.0 {
            // sum(p log p) is the negative entropy; adding it scaled by
            // the bonus weight rewards spread-out action distributions.
            let logp = fw.tape.log(rec.action_probs);
            let plogp = fw.tape.mul(rec.action_probs, logp)?;
            let neg_entropy = fw.tape.sum(plogp);
            terms.push(fw.tape.affine(neg_entropy, config.rl_entropy_bonus, 0.0));
        }
        for (t, &lp) in rec.token_logprobs.iter().enumerate() {
            let adv_word = rewards.returns_g[i][t] - baselines.word;
            terms.push(fw.tape.affine(lp, -adv_word, 0.0));
        }
    }
    if config.rl_updates_z {
        if let Some(lp_stop) = trace.stop_logprob {
            // No reward follows the stop decision, so its return is zero.
            let adv = 0.0 - baselines.sentence;
            terms.push(fw.tape.affine(lp_stop, -adv, 0.0));
        }
    }
    if terms.is_empty() {
        return Ok(None);
    }
    let stacked = fw.tape.concat(&terms)?;
    Ok(Some(fw.tape.sum(stacked)))
}

/// Gradient filter for the fine-tuning phase.
pub fn rl_trainable(config: &TrainConfig) -> impl Fn(&str) -> bool + '_ {
    |name: &str| {
        ModelParameters::is_policy_param(name)
            || ModelParameters::is_generation_param(name)
            || (config.rl_updates_z && ModelParameters::is_stop_param(name))
    }
}

/// One epoch of sampled-rollout fine-tuning; parameters are updated in
/// place once per batch.
#[allow(clippy::too_many_arguments)]
pub fn train_rl_epoch(
    params: &mut ModelParameters,
    train: &[ReportSample],
    templates: &TemplateDatabase,
    vocab: &Vocabulary,
    config: &TrainConfig,
    stats: &NgramStats,
    optimizer: &mut Optimizer,
    baselines: &mut Baselines,
    rng: &mut Rng,
) -> Result<RlEpochStats, TrainError> {
    let cider_opts = CiderOpts::default();
    let opts = RolloutOptions::sampling(config.limits);
    let mut order: Vec<usize> = (0..train.len()).collect();
    rng.shuffle(&mut order);

    let mut loss_sum = 0.0;
    let mut loss_count = 0usize;
    let mut reward_sum = 0.0;
    let mut reward_count = 0usize;
    let mut empty_reports = 0usize;
    let mut retrieved = 0usize;
    let mut sentences_total = 0usize;

    for batch in order.chunks(config.batch_size) {
        let mut grads = Gradients::default();
        let weight = 1.0 / batch.len() as f64;
        for &idx in batch {
            let sample = &train[idx];
            let (mut fw, trace) =
                rollout(params, &sample.features_array(), templates, vocab, &opts, rng)?;
            let texts = trace.sentence_texts();
            let generated = trace.generated_mask();
            let rewards = compute_reward_trace(
                &texts,
                &generated,
                &sample.sentence_tokens(),
                stats,
                &cider_opts,
                config.gamma,
            );

            if trace.sentences.is_empty() {
                empty_reports += 1;
            }
            sentences_total += trace.sentences.len();
            retrieved += trace
                .sentences
                .iter()
                .filter(|s| matches!(s.source, SentenceSource::Retrieved(_)))
                .count();
            reward_sum += rewards.sentence_rewards.iter().sum::<f64>();
            reward_count += rewards.sentence_rewards.len();

            let effective = if config.baseline.enabled {
                *baselines
            } else {
                Baselines::default()
            };
            if let Some(loss) = policy_loss(&mut fw, &trace, &rewards, config, effective)? {
                let value = fw.tape.value(loss).item();
                if !value.is_finite() {
                    return Err(NumericsError::NonFiniteLoss {
                        context: format!("policy loss for sample {}", sample.id),
                    }
                    .into());
                }
                loss_sum += value;
                loss_count += 1;
                let mut g = fw.tape.backward(loss)?;
                g.zero_except(rl_trainable(config));
                grads.add_scaled(&g, weight);
            }
            if config.baseline.enabled {
                baselines.update(config.baseline.ema_decay, &rewards);
            }
        }
        optimizer.step(&mut params.params, &grads)?;
    }

    let epoch_stats = RlEpochStats {
        mean_policy_loss: if loss_count == 0 { 0.0 } else { loss_sum / loss_count as f64 },
        mean_sentence_reward: if reward_count == 0 {
            0.0
        } else {
            reward_sum / reward_count as f64
        },
        empty_reports,
        total_reports: train.len(),
        all_stopped: empty_reports == train.len() && !train.is_empty(),
        retrieval_fraction: if sentences_total == 0 {
            0.0
        } else {
            retrieved as f64 / sentences_total as f64
        },
    };
    if epoch_stats.all_stopped {
        eprintln!(
            "warning: every sampled rollout stopped before emitting a sentence; \
             consider setting rl_entropy_bonus > 0 to restore exploration"
        );
    }
    Ok(epoch_stats)
}
