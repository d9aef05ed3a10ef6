//! Abnormality-terminology detection: precision and false-positive rate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Per-term mention tallies across the evaluated reports.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermStats {
    /// Reports whose prediction mentions the term.
    pub predicted: usize,
    /// Reports whose gold text mentions the term.
    pub gold: usize,
    pub true_positives: usize,
    pub false_positives: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDetection {
    /// Micro-averaged precision: TP mentions / predicted mentions.
    pub precision: f64,
    /// Mean false-positive term mentions per report.
    pub afp: f64,
    /// True when no term was ever predicted (precision reported as 0.0).
    pub no_predictions: bool,
    pub per_term: BTreeMap<String, TermStats>,
}

/// A term is mentioned iff its string occurs in the report text. Reports
/// are compared pairwise: predictions[k] against gold[k].
pub fn term_detection(
    predictions: &[String],
    gold: &[String],
    term_list: &[String],
) -> TermDetection {
    assert_eq!(predictions.len(), gold.len());
    assert!(!term_list.is_empty(), "term list must be nonempty");

    let mut per_term: BTreeMap<String, TermStats> = term_list
        .iter()
        .map(|t| (t.clone(), TermStats::default()))
        .collect();
    let mut tp = 0usize;
    let mut fp = 0usize;

    for (pred, gt) in predictions.iter().zip(gold) {
        for term in term_list {
            let stats = per_term.get_mut(term).expect("initialized above");
            let in_pred = pred.contains(term.as_str());
            let in_gold = gt.contains(term.as_str());
            if in_pred {
                stats.predicted += 1;
            }
            if in_gold {
                stats.gold += 1;
            }
            match (in_pred, in_gold) {
                (true, true) => {
                    stats.true_positives += 1;
                    tp += 1;
                }
                (true, false) => {
                    stats.false_positives += 1;
                    fp += 1;
                }
                _ => {}
            }
        }
    }

    let predicted_total = tp + fp;
    let n_reports = predictions.len().max(1);
    TermDetection {
        precision: if predicted_total == 0 {
            0.0
        } else {
            tp as f64 / predicted_total as f64
        },
        afp: fp as f64 / n_reports as f64,
        no_predictions: predicted_total == 0,
        per_term,
    }
}
