//! Full-report rollout: repeatedly consult the stop gate, pick a
//! retrieval action per sentence, and either copy a template or generate
//! words, recording every stochastic decision for later policy updates.

use serde::{Deserialize, Serialize};

use crate::corpus::{TemplateDatabase, Vocabulary, BOS, EOS};
use crate::error::ModelError;
use crate::numerics::{Array, NodeId, Rng};

use super::forward::{argmax, Forward};
use super::params::ModelParameters;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeMode {
    /// Deterministic: argmax actions/tokens, stop when z >= 1/2.
    Greedy,
    /// Stochastic: sample every decision from its distribution.
    Sample,
}

/// Restricts which retrieval actions a rollout may take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionConstraint {
    #[default]
    None,
    /// Only template actions (1..) are allowed.
    RetrievalOnly,
    /// Every sentence is generated word-by-word (action 0).
    GenerationOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RolloutLimits {
    pub max_sentences: usize,
    pub max_tokens: usize,
}

impl Default for RolloutLimits {
    fn default() -> Self {
        RolloutLimits { max_sentences: 7, max_tokens: 15 }
    }
}

/// Everything that shapes a rollout besides the model and the sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutOptions {
    pub mode: DecodeMode,
    pub constraint: ActionConstraint,
    pub limits: RolloutLimits,
    /// Greedy decoding stops once the stop gate reaches this value;
    /// ignored in sample mode.
    pub stop_threshold: f64,
}

impl Default for RolloutOptions {
    fn default() -> Self {
        RolloutOptions {
            mode: DecodeMode::Greedy,
            constraint: ActionConstraint::None,
            limits: RolloutLimits::default(),
            stop_threshold: 0.5,
        }
    }
}

impl RolloutOptions {
    pub fn sampling(limits: RolloutLimits) -> Self {
        RolloutOptions { mode: DecodeMode::Sample, limits, ..Self::default() }
    }

    pub fn greedy(limits: RolloutLimits) -> Self {
        RolloutOptions { limits, ..Self::default() }
    }

    pub fn with_constraint(mut self, constraint: ActionConstraint) -> Self {
        self.constraint = constraint;
        self
    }
}

/// Where a sentence came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SentenceSource {
    /// Copied from template group `action` (1-based action index).
    Retrieved(usize),
    Generated,
}

/// One emitted sentence together with the tape nodes of the decisions
/// that produced it.
pub struct SentenceRecord {
    /// Stop-gate probability at this step (the decision was "continue").
    pub z: f64,
    /// Tape node of `log(1 - z)`, the continue decision's log-probability.
    pub continue_logprob: NodeId,
    /// Chosen action: 0 = generate, k >= 1 = template group k.
    pub action: usize,
    pub action_logprob: NodeId,
    /// Tape node of the full action distribution (for entropy terms).
    pub action_probs: NodeId,
    /// Surface tokens (end marker excluded).
    pub tokens: Vec<String>,
    pub token_ids: Vec<u32>,
    /// Tape nodes of each word's log-probability; empty for retrieved
    /// sentences.
    pub token_logprobs: Vec<NodeId>,
    pub source: SentenceSource,
}

/// Record of a complete sampled or greedy report.
pub struct EpisodeTrace {
    pub sentences: Vec<SentenceRecord>,
    /// Tape node of `log z` for the final stop decision; `None` when the
    /// rollout ended by hitting the sentence limit instead.
    pub stop_logprob: Option<NodeId>,
}

impl EpisodeTrace {
    pub fn sentence_texts(&self) -> Vec<Vec<String>> {
        self.sentences.iter().map(|s| s.tokens.clone()).collect()
    }

    /// Mask of which sentences were generated (vs retrieved).
    pub fn generated_mask(&self) -> Vec<bool> {
        self.sentences
            .iter()
            .map(|s| s.source == SentenceSource::Generated)
            .collect()
    }

    /// Fraction of sentences drawn from the template database.
    pub fn retrieval_fraction(&self) -> Option<f64> {
        if self.sentences.is_empty() {
            return None;
        }
        let retrieved = self
            .sentences
            .iter()
            .filter(|s| matches!(s.source, SentenceSource::Retrieved(_)))
            .count();
        Some(retrieved as f64 / self.sentences.len() as f64)
    }
}

/// Roll out a full report on a fresh tape.
///
/// `features` is the `[regions, d_feat]` grid for one sample. The
/// returned [`Forward`] owns the tape so a policy-gradient loss can be
/// assembled over the recorded decision nodes.
pub fn rollout(
    params: &ModelParameters,
    features: &Array,
    templates: &TemplateDatabase,
    vocab: &Vocabulary,
    opts: &RolloutOptions,
    rng: &mut Rng,
) -> Result<(Forward, EpisodeTrace), ModelError> {
    let RolloutOptions { mode, constraint, limits, stop_threshold } = *opts;
    if params.dims.n_templates != templates.len() {
        return Err(ModelError::DimMismatch {
            checkpoint: format!("model({} template groups)", params.dims.n_templates),
            expected: format!("database({} template groups)", templates.len()),
        });
    }
    let mut fw = Forward::new(params);
    let enc = fw.encode(features)?;
    let mut state = fw.topic_hidden();
    let mut trace = EpisodeTrace { sentences: Vec::new(), stop_logprob: None };

    for _ in 0..limits.max_sentences {
        let step = fw.topic_step(&enc, &mut state)?;
        let z_val = fw.tape.value(step.z).item();
        let stop = match mode {
            DecodeMode::Greedy => z_val >= stop_threshold,
            DecodeMode::Sample => rng.bernoulli(z_val),
        };
        if stop {
            trace.stop_logprob = Some(fw.tape.log(step.z));
            break;
        }
        let continue_logprob = fw.log_one_minus(step.z);

        let probs_node = fw.action_probs(step.q)?;
        let probs = fw.tape.value(probs_node).data().to_vec();
        let action = choose_action(&probs, mode, constraint, rng);
        let action_logprob = fw.logprob(probs_node, action)?;

        let mut record = SentenceRecord {
            z: z_val,
            continue_logprob,
            action,
            action_logprob,
            action_probs: probs_node,
            tokens: Vec::new(),
            token_ids: Vec::new(),
            token_logprobs: Vec::new(),
            source: if action == 0 {
                SentenceSource::Generated
            } else {
                SentenceSource::Retrieved(action)
            },
        };

        if action == 0 {
            let mut h = fw.zeros(fw.dims.d_hidden);
            let mut prev = BOS;
            for _ in 0..limits.max_tokens {
                let (word_probs_node, h_next) = fw.gen_step(&enc, step.q, prev, h)?;
                let word_probs = fw.tape.value(word_probs_node).data().to_vec();
                let token = match mode {
                    DecodeMode::Greedy => argmax(&word_probs) as u32,
                    DecodeMode::Sample => rng.categorical(&word_probs) as u32,
                };
                if token == EOS {
                    break;
                }
                record.token_logprobs.push(fw.logprob(word_probs_node, token as usize)?);
                record.token_ids.push(token);
                record.tokens.push(vocab.token(token).to_string());
                prev = token;
                h = h_next;
            }
        } else {
            let group = templates.group_for_action(action).ok_or_else(|| {
                ModelError::BadCheckpoint(format!("action {action} has no template group"))
            })?;
            record.tokens = group.canonical_tokens();
            record.token_ids = vocab.encode(&record.tokens);
        }
        trace.sentences.push(record);
    }
    Ok((fw, trace))
}

/// Pick a retrieval action under the given constraint. Greedy mode takes
/// the most probable allowed action (ties to the lowest index); sample
/// mode renormalizes over the allowed set.
fn choose_action(
    probs: &[f64],
    mode: DecodeMode,
    constraint: ActionConstraint,
    rng: &mut Rng,
) -> usize {
    let allowed: Vec<usize> = match constraint {
        ActionConstraint::None => (0..probs.len()).collect(),
        ActionConstraint::GenerationOnly => vec![0],
        ActionConstraint::RetrievalOnly if probs.len() > 1 => (1..probs.len()).collect(),
        // No templates exist; generation is the only possible action.
        ActionConstraint::RetrievalOnly => vec![0],
    };
    let masked: Vec<f64> = allowed.iter().map(|&i| probs[i]).collect();
    let pick = match mode {
        DecodeMode::Greedy => argmax(&masked),
        DecodeMode::Sample => rng.categorical(&masked),
    };
    allowed[pick]
}
