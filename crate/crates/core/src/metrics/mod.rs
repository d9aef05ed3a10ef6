//! Report-quality metrics and reward shaping.

mod bleu;
mod cider;
mod ngram;
mod rewards;
mod rouge;
mod terms;

pub use bleu::bleu;
pub use cider::{cider, cider_doc, CiderOpts};
pub use ngram::{ngram_counts, NgramStats, MAX_N};
pub use rewards::{
    compute_reward_trace, discounted_returns, sentence_reward, sentence_reward_series,
    word_reward, word_reward_series, RewardTrace,
};
pub use rouge::{rouge_l, rouge_l_doc, DEFAULT_ROUGE_BETA};
pub use terms::{term_detection, TermDetection, TermStats};
