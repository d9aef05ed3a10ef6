//! Incremental reward shaping for episode training.
//!
//! Sentence- and word-level rewards are deltas of the consensus score as
//! the candidate grows one unit at a time, with the empty prefix scoring
//! zero. The deltas telescope: their sum equals the score of the full
//! candidate, so sentence rewards credit each sentence with exactly its
//! marginal contribution.

use crate::metrics::cider::{cider_doc, CiderOpts};
use crate::metrics::ngram::NgramStats;

/// Discounted suffix sums: returns[t] = rewards[t] + gamma * returns[t+1].
pub fn discounted_returns(rewards: &[f64], gamma: f64) -> Vec<f64> {
    assert!((0.0..=1.0).contains(&gamma), "gamma must lie in [0, 1]");
    let mut returns = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for (slot, &r) in returns.iter_mut().zip(rewards).rev() {
        acc = r + gamma * acc;
        *slot = acc;
    }
    returns
}

/// Score of a candidate prefix against a single reference document. The
/// empty prefix scores zero by construction.
fn prefix_score(prefix: &[String], reference: &[String], stats: &NgramStats, opts: &CiderOpts) -> f64 {
    if prefix.is_empty() {
        0.0
    } else {
        cider_doc(prefix, reference, stats, opts)
    }
}

/// Delta score of appending sentence `i` (0-based) to the report prefix:
/// f(sentences[..=i]) - f(sentences[..i]) against the full reference.
pub fn sentence_reward(
    sentences: &[Vec<String>],
    i: usize,
    reference: &[String],
    stats: &NgramStats,
    opts: &CiderOpts,
) -> f64 {
    assert!(i < sentences.len());
    let flat = |upto: usize| -> Vec<String> {
        sentences[..upto].iter().flatten().cloned().collect()
    };
    let with = prefix_score(&flat(i + 1), reference, stats, opts);
    let without = prefix_score(&flat(i), reference, stats, opts);
    with - without
}

/// Delta rewards for every sentence of a report.
pub fn sentence_reward_series(
    sentences: &[Vec<String>],
    reference: &[String],
    stats: &NgramStats,
    opts: &CiderOpts,
) -> Vec<f64> {
    let mut rewards = Vec::with_capacity(sentences.len());
    let mut flat: Vec<String> = Vec::new();
    let mut prev = 0.0;
    for sentence in sentences {
        flat.extend(sentence.iter().cloned());
        let score = prefix_score(&flat, reference, stats, opts);
        rewards.push(score - prev);
        prev = score;
    }
    rewards
}

/// Delta rewards for every token of one sentence against its aligned
/// ground-truth sentence. An empty reference yields all-zero rewards.
pub fn word_reward_series(
    tokens: &[String],
    gt_sentence: &[String],
    stats: &NgramStats,
    opts: &CiderOpts,
) -> Vec<f64> {
    let mut rewards = Vec::with_capacity(tokens.len());
    let mut prev = 0.0;
    for t in 1..=tokens.len() {
        let score = prefix_score(&tokens[..t], gt_sentence, stats, opts);
        rewards.push(score - prev);
        prev = score;
    }
    rewards
}

/// Delta reward of token `t` (0-based) within a sentence.
pub fn word_reward(
    tokens: &[String],
    t: usize,
    gt_sentence: &[String],
    stats: &NgramStats,
    opts: &CiderOpts,
) -> f64 {
    assert!(t < tokens.len());
    let with = prefix_score(&tokens[..=t], gt_sentence, stats, opts);
    let without = prefix_score(&tokens[..t], gt_sentence, stats, opts);
    with - without
}

/// Full reward bookkeeping for one sampled episode.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardTrace {
    /// Delta score per emitted sentence.
    pub sentence_rewards: Vec<f64>,
    /// Per sentence: delta score per token (empty for retrieved sentences).
    pub word_rewards: Vec<Vec<f64>>,
    /// Discounted sentence-level returns.
    pub returns_r: Vec<f64>,
    /// Discounted word-level returns per generated sentence.
    pub returns_g: Vec<Vec<f64>>,
    pub gamma: f64,
}

/// Compute the trace for a sampled report. `generated[i]` marks sentences
/// produced word-by-word (these receive word-level rewards against the
/// positionally aligned reference sentence; sentences beyond the reference
/// get zero word rewards).
pub fn compute_reward_trace(
    sentences: &[Vec<String>],
    generated: &[bool],
    reference_sentences: &[Vec<String>],
    stats: &NgramStats,
    opts: &CiderOpts,
    gamma: f64,
) -> RewardTrace {
    assert_eq!(sentences.len(), generated.len());
    let reference_flat: Vec<String> = reference_sentences.iter().flatten().cloned().collect();
    let sentence_rewards = sentence_reward_series(sentences, &reference_flat, stats, opts);
    let returns_r = discounted_returns(&sentence_rewards, gamma);

    let empty: Vec<String> = Vec::new();
    let mut word_rewards = Vec::with_capacity(sentences.len());
    let mut returns_g = Vec::with_capacity(sentences.len());
    for (i, sentence) in sentences.iter().enumerate() {
        if generated[i] {
            let gt = reference_sentences.get(i).unwrap_or(&empty);
            let rewards = word_reward_series(sentence, gt, stats, opts);
            returns_g.push(discounted_returns(&rewards, gamma));
            word_rewards.push(rewards);
        } else {
            word_rewards.push(Vec::new());
            returns_g.push(Vec::new());
        }
    }

    RewardTrace {
        sentence_rewards,
        word_rewards,
        returns_r,
        returns_g,
        gamma,
    }
}
