//! The dataset record: features plus the reference report.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::numerics::Array;

/// One training/evaluation sample. `features` stands in for encoded image
/// regions (`regions x feat_dim`); `report` holds the reference sentences
/// as space-joined lowercase tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSample {
    pub id: String,
    pub features: Vec<Vec<f64>>,
    pub report: Vec<String>,
    pub findings: BTreeSet<String>,
    pub abnormal_terms: BTreeSet<String>,
}

impl ReportSample {
    /// Feature grid as a dense `regions x feat_dim` array.
    pub fn features_array(&self) -> Array {
        let rows = self.features.len();
        let cols = self.features.first().map(|r| r.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows * cols);
        for row in &self.features {
            data.extend_from_slice(row);
        }
        Array::new(vec![rows, cols], data).expect("rectangular feature grid")
    }

    /// Sentences as token sequences.
    pub fn sentence_tokens(&self) -> Vec<Vec<String>> {
        self.report
            .iter()
            .map(|s| s.split_whitespace().map(|t| t.to_string()).collect())
            .collect()
    }

    /// All report tokens flattened into one sequence (document view used
    /// by corpus-level metrics).
    pub fn flat_tokens(&self) -> Vec<String> {
        self.report
            .iter()
            .flat_map(|s| s.split_whitespace().map(|t| t.to_string()))
            .collect()
    }
}
