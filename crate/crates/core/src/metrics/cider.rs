//! Consensus-based n-gram scoring with tf-idf weighting.
//!
//! Per document and order n, candidate and reference n-gram counts are
//! weighted by corpus idf; the similarity is the count-clipped inner
//! product over the product of vector norms. The document score averages
//! orders 1..=4 and scales by 10; the corpus score averages documents.

use serde::{Deserialize, Serialize};

use crate::metrics::ngram::{ngram_counts, NgramStats, MAX_N};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CiderOpts {
    /// Apply the Gaussian length penalty per order (the "-D" variant).
    pub length_penalty: bool,
    /// Penalty width in tokens.
    pub sigma: f64,
}

impl Default for CiderOpts {
    fn default() -> Self {
        CiderOpts {
            length_penalty: false,
            sigma: 6.0,
        }
    }
}

/// Score one candidate against one reference document.
pub fn cider_doc(
    candidate: &[String],
    reference: &[String],
    stats: &NgramStats,
    opts: &CiderOpts,
) -> f64 {
    let mut total = 0.0;
    for n in 1..=MAX_N {
        let c_counts = ngram_counts(candidate, n);
        let r_counts = ngram_counts(reference, n);

        let mut num = 0.0;
        let mut c_norm_sq = 0.0;
        for (gram, c_count) in &c_counts {
            let idf = stats.idf(n, gram);
            let c_w = c_count * idf;
            c_norm_sq += c_w * c_w;
            if let Some(r_count) = r_counts.get(gram) {
                let r_w = r_count * idf;
                num += c_w.min(r_w) * r_w;
            }
        }
        let mut r_norm_sq = 0.0;
        for (gram, r_count) in &r_counts {
            let r_w = r_count * stats.idf(n, gram);
            r_norm_sq += r_w * r_w;
        }

        let denom = c_norm_sq.sqrt() * r_norm_sq.sqrt();
        let mut sim = if denom > 0.0 { num / denom } else { 0.0 };
        if opts.length_penalty {
            let delta = candidate.len() as f64 - reference.len() as f64;
            sim *= (-delta * delta / (2.0 * opts.sigma * opts.sigma)).exp();
        }
        total += sim;
    }
    total * 10.0 / MAX_N as f64
}

/// Mean document score over a corpus, one candidate per reference.
pub fn cider(
    candidates: &[Vec<String>],
    references: &[Vec<String>],
    stats: &NgramStats,
    opts: &CiderOpts,
) -> f64 {
    assert_eq!(
        candidates.len(),
        references.len(),
        "one candidate per reference document"
    );
    if candidates.is_empty() {
        return 0.0;
    }
    let total: f64 = candidates
        .iter()
        .zip(references)
        .map(|(c, r)| cider_doc(c, r, stats, opts))
        .sum();
    total / candidates.len() as f64
}
