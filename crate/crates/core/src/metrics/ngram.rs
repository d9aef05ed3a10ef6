//! N-gram extraction and corpus idf statistics.

use std::collections::{BTreeMap, BTreeSet};

/// Highest n-gram order used by the consensus metric.
pub const MAX_N: usize = 4;

/// Join a token window into a single map key. Tokens never contain
/// whitespace (they come from whitespace tokenization), so a space join is
/// unambiguous.
fn key(window: &[String]) -> String {
    window.join(" ")
}

/// Raw n-gram counts of a token sequence for one order.
pub fn ngram_counts(tokens: &[String], n: usize) -> BTreeMap<String, f64> {
    let mut counts = BTreeMap::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for window in tokens.windows(n) {
        *counts.entry(key(window)).or_insert(0.0) += 1.0;
    }
    counts
}

/// Inverse document frequencies over a reference corpus, per n-gram order
/// 1..=4. An n-gram's df counts the documents containing it at least once.
#[derive(Debug, Clone)]
pub struct NgramStats {
    idf: [BTreeMap<String, f64>; MAX_N],
    document_count: usize,
}

impl NgramStats {
    pub fn build(references: &[Vec<String>]) -> Self {
        let n_docs = references.len().max(1);
        let mut idf: [BTreeMap<String, f64>; MAX_N] = Default::default();
        for n in 1..=MAX_N {
            let mut df: BTreeMap<String, usize> = BTreeMap::new();
            for doc in references {
                let distinct: BTreeSet<String> =
                    doc.windows(n).map(key).collect();
                for gram in distinct {
                    *df.entry(gram).or_insert(0) += 1;
                }
            }
            idf[n - 1] = df
                .into_iter()
                .map(|(g, d)| (g, (n_docs as f64 / d as f64).ln()))
                .collect();
        }
        NgramStats {
            idf,
            document_count: n_docs,
        }
    }

    pub fn document_count(&self) -> usize {
        self.document_count
    }

    /// Idf for an n-gram of order `n`; n-grams unseen in the reference
    /// corpus are treated as having df = 1.
    pub fn idf(&self, n: usize, gram: &str) -> f64 {
        debug_assert!((1..=MAX_N).contains(&n));
        self.idf[n - 1]
            .get(gram)
            .copied()
            .unwrap_or_else(|| (self.document_count as f64).ln())
    }

    /// True when the reference corpus contains this n-gram.
    pub fn contains(&self, n: usize, gram: &str) -> bool {
        self.idf[n - 1].contains_key(gram)
    }
}
