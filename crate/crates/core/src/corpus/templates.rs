//! Template sentence mining and grouping.
//!
//! Frequent sentences in the training corpus become retrievable templates.
//! Mining counts document frequency (a sentence counts once per report no
//! matter how often it repeats inside it); grouping merges sentences whose
//! stop-word-stripped forms coincide, so light phrasing variants share one
//! template slot.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::tokenize::{normalize_sentence, tokenize};

/// One surface realization of a template with its document frequency.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateVariant {
    pub text: String,
    pub df: usize,
}

/// A set of variants sharing one normalized form. `canonical` indexes the
/// variant with maximal df (ties broken by lexicographically smallest
/// text); only the canonical sentence is ever emitted at retrieval time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateGroup {
    pub variants: Vec<TemplateVariant>,
    pub canonical: usize,
}

impl TemplateGroup {
    pub fn total_df(&self) -> usize {
        self.variants.iter().map(|v| v.df).sum()
    }

    pub fn canonical_text(&self) -> &str {
        &self.variants[self.canonical].text
    }

    pub fn canonical_tokens(&self) -> Vec<String> {
        tokenize(self.canonical_text())
    }
}

/// Ordered template groups. Retrieval actions use 1-based indices
/// (action 0 means "generate"), so group k is `groups[k-1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateDatabase {
    pub df_threshold: usize,
    pub groups: Vec<TemplateGroup>,
}

impl TemplateDatabase {
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Group for a 1-based retrieval action index.
    pub fn group_for_action(&self, action: usize) -> Option<&TemplateGroup> {
        if action == 0 {
            None
        } else {
            self.groups.get(action - 1)
        }
    }

    /// Map from normalized sentence form to 1-based action index.
    pub fn action_lookup(&self, stop_words: &[String]) -> BTreeMap<String, usize> {
        self.groups
            .iter()
            .enumerate()
            .map(|(i, g)| (normalize_sentence(g.canonical_text(), stop_words), i + 1))
            .collect()
    }
}

/// Count document frequencies and keep sentences with df at or above the
/// threshold, ordered by df descending (ties: text ascending). Documents
/// are lists of sentences; each sentence is a token sequence.
pub fn mine_templates(
    documents: &[Vec<Vec<String>>],
    df_threshold: usize,
) -> Vec<TemplateVariant> {
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for doc in documents {
        let distinct: BTreeSet<String> = doc.iter().map(|s| s.join(" ")).collect();
        for sentence in distinct {
            if !sentence.is_empty() {
                *df.entry(sentence).or_insert(0) += 1;
            }
        }
    }
    let mut candidates: Vec<TemplateVariant> = df
        .into_iter()
        .filter(|(_, c)| *c >= df_threshold)
        .map(|(text, df)| TemplateVariant { text, df })
        .collect();
    candidates.sort_by(|a, b| b.df.cmp(&a.df).then(a.text.cmp(&b.text)));
    candidates
}

/// Merge mined candidates into template groups keyed by their normalized
/// form. Groups are ordered by total df descending (ties: normalized form
/// ascending), giving stable 1-based retrieval indices.
pub fn group_templates(
    candidates: Vec<TemplateVariant>,
    df_threshold: usize,
    stop_words: &[String],
) -> TemplateDatabase {
    let mut by_key: BTreeMap<String, Vec<TemplateVariant>> = BTreeMap::new();
    for cand in candidates {
        let key = normalize_sentence(&cand.text, stop_words);
        by_key.entry(key).or_default().push(cand);
    }

    let mut keyed_groups: Vec<(String, TemplateGroup)> = by_key
        .into_iter()
        .map(|(key, mut variants)| {
            variants.sort_by(|a, b| b.df.cmp(&a.df).then(a.text.cmp(&b.text)));
            // After the sort above, the max-df (tie: smallest text) variant
            // sits first.
            (key, TemplateGroup { variants, canonical: 0 })
        })
        .collect();
    keyed_groups.sort_by(|(ka, ga), (kb, gb)| {
        gb.total_df().cmp(&ga.total_df()).then(ka.cmp(kb))
    });

    TemplateDatabase {
        df_threshold,
        groups: keyed_groups.into_iter().map(|(_, g)| g).collect(),
    }
}
