//! Synthetic chest-report corpus generator.
//!
//! Each sample draws a binary vector of findings. Normal findings emit one
//! of a few fixed phrasing variants (these become the mined templates);
//! abnormal findings emit a compositional sentence from a small grammar
//! (severity, location, finding term, optional evidence clause), giving
//! lexical diversity that retrieval alone cannot express. Features are a
//! noisy linear image of the finding vector, so the mapping from features
//! back to findings is learnable.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::sample::ReportSample;
use crate::error::CorpusError;
use crate::numerics::Rng;

/// Normal findings: (label, phrasing variants). Variants differ only in
/// stop words and punctuation so that template grouping merges them.
const NORMAL_BANK: &[(&str, [&str; 3])] = &[
    (
        "normal_heart",
        [
            "the heart size and mediastinal contours are normal .",
            "heart size and mediastinal contours are normal .",
            "the heart size and mediastinal contours normal .",
        ],
    ),
    (
        "normal_lungs",
        [
            "the lungs are clear .",
            "lungs are clear .",
            "lungs clear .",
        ],
    ),
    (
        "normal_pleura",
        [
            "there is no pleural effusion or pneumothorax .",
            "no pleural effusion or pneumothorax .",
            "no pleural effusion or pneumothorax",
        ],
    ),
    (
        "normal_consolidation",
        [
            "no evidence of focal consolidation .",
            "there is no evidence of focal consolidation .",
            "no evidence focal consolidation .",
        ],
    ),
    (
        "normal_bones",
        [
            "no acute bony abnormality .",
            "there is no acute bony abnormality .",
            "no acute bony abnormality",
        ],
    ),
];

/// How often each phrasing variant is chosen, so the first variant
/// dominates and becomes the canonical template.
const VARIANT_WEIGHTS: [f64; 3] = [6.0, 2.0, 1.0];

/// Abnormal finding terms. None of these words occur in the normal bank,
/// so term detection cannot be satisfied by template sentences.
const ABNORMAL_TERMS: &[&str] = &["atelectasis", "granuloma", "opacity", "scarring"];

const SEVERITIES: &[&str] = &["mild", "moderate", "severe"];
const LOCATIONS: &[&str] = &[
    "left basilar",
    "right basilar",
    "left upper lobe",
    "right upper lobe",
];
const EVIDENCE: &[&str] = &["", " compatible with infection", " likely reflecting chronic changes"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_samples: usize,
    pub n_normal_findings: usize,
    pub n_abnormal_findings: usize,
    pub p_normal_present: f64,
    pub p_abnormal_present: f64,
    pub regions: usize,
    pub feat_dim: usize,
    pub noise_sigma: f64,
    pub template_variant_count: usize,
    pub max_sentences: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_samples: 2000,
            n_normal_findings: 5,
            n_abnormal_findings: 4,
            p_normal_present: 0.95,
            p_abnormal_present: 0.2,
            regions: 16,
            feat_dim: 32,
            noise_sigma: 0.1,
            template_variant_count: 3,
            max_sentences: 7,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let bad = |msg: String| Err(CorpusError::BadConfig(msg));
        if self.n_samples == 0 || self.regions == 0 || self.feat_dim == 0 {
            return bad("n_samples, regions, and feat_dim must be positive".into());
        }
        if self.n_normal_findings == 0 || self.n_normal_findings > NORMAL_BANK.len() {
            return bad(format!(
                "n_normal_findings must be in 1..={}",
                NORMAL_BANK.len()
            ));
        }
        if self.n_abnormal_findings > ABNORMAL_TERMS.len() {
            return bad(format!(
                "n_abnormal_findings must be at most {}",
                ABNORMAL_TERMS.len()
            ));
        }
        if self.template_variant_count == 0 || self.template_variant_count > VARIANT_WEIGHTS.len()
        {
            return bad(format!(
                "template_variant_count must be in 1..={}",
                VARIANT_WEIGHTS.len()
            ));
        }
        for (name, p) in [
            ("p_normal_present", self.p_normal_present),
            ("p_abnormal_present", self.p_abnormal_present),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1]"));
            }
        }
        if self.noise_sigma < 0.0 {
            return bad("noise_sigma must be non-negative".into());
        }
        if self.max_sentences == 0 {
            return bad("max_sentences must be positive".into());
        }
        Ok(())
    }

    fn n_findings(&self) -> usize {
        self.n_normal_findings + self.n_abnormal_findings
    }
}

/// Labels of the abnormal finding terms in use for a config.
pub fn abnormal_term_list(config: &SynthConfig) -> Vec<String> {
    ABNORMAL_TERMS[..config.n_abnormal_findings]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

/// Fraction of gold sentences that come from the normal-template bank.
pub fn template_sentence_fraction(samples: &[ReportSample]) -> f64 {
    let mut template_sentences = 0usize;
    let mut total = 0usize;
    for s in samples {
        template_sentences += s
            .findings
            .iter()
            .filter(|f| f.starts_with("normal_"))
            .count();
        total += s.report.len();
    }
    if total == 0 {
        0.0
    } else {
        template_sentences as f64 / total as f64
    }
}

/// Generate a corpus. Bitwise-deterministic for a given (config, seed).
pub fn synth_generate(config: &SynthConfig, rng: &mut Rng) -> Result<Vec<ReportSample>, CorpusError> {
    config.validate()?;
    let n_findings = config.n_findings();

    // One ground-truth linear map per region, drawn once per corpus.
    let w_true: Vec<Vec<f64>> = (0..config.regions)
        .map(|_| {
            (0..config.feat_dim * n_findings)
                .map(|_| rng.uniform(-1.0, 1.0))
                .collect()
        })
        .collect();

    let mut samples = Vec::with_capacity(config.n_samples);
    for idx in 0..config.n_samples {
        let mut normals: Vec<bool> = (0..config.n_normal_findings)
            .map(|_| rng.bernoulli(config.p_normal_present))
            .collect();
        let mut abnormals: Vec<bool> = (0..config.n_abnormal_findings)
            .map(|_| rng.bernoulli(config.p_abnormal_present))
            .collect();
        // An entirely negative draw would produce an empty report; force
        // the most common normal statement instead.
        if !normals.iter().any(|&b| b) && !abnormals.iter().any(|&b| b) {
            normals[0] = true;
        }

        let mut report: Vec<String> = Vec::new();
        let mut findings: BTreeSet<String> = BTreeSet::new();
        let mut terms: BTreeSet<String> = BTreeSet::new();

        for (i, present) in normals.iter().enumerate() {
            if !present {
                continue;
            }
            let (label, variants) = NORMAL_BANK[i];
            let v = rng.categorical(&VARIANT_WEIGHTS[..config.template_variant_count]);
            report.push(variants[v].to_string());
            findings.insert(label.to_string());
        }
        let mut abnormal_sentences: Vec<(usize, String)> = Vec::new();
        for (j, present) in abnormals.iter().enumerate() {
            if !present {
                continue;
            }
            let term = ABNORMAL_TERMS[j];
            let sev = SEVERITIES[rng.below(SEVERITIES.len())];
            let loc = LOCATIONS[rng.below(LOCATIONS.len())];
            let evid = EVIDENCE[rng.below(EVIDENCE.len())];
            abnormal_sentences.push((j, format!("there is {sev} {loc} {term}{evid} .")));
        }

        // Cap the report length by dropping trailing abnormal sentences,
        // keeping findings/terms/features consistent with the kept text.
        for (j, sentence) in abnormal_sentences.into_iter() {
            if report.len() >= config.max_sentences {
                abnormals[j] = false;
                continue;
            }
            report.push(sentence);
            findings.insert(ABNORMAL_TERMS[j].to_string());
            terms.insert(ABNORMAL_TERMS[j].to_string());
        }

        let x: Vec<f64> = normals
            .iter()
            .chain(abnormals.iter())
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect();
        let features: Vec<Vec<f64>> = (0..config.regions)
            .map(|p| {
                (0..config.feat_dim)
                    .map(|d| {
                        let row = &w_true[p][d * n_findings..(d + 1) * n_findings];
                        let mean: f64 = row.iter().zip(&x).map(|(w, v)| w * v).sum();
                        mean + config.noise_sigma * rng.normal()
                    })
                    .collect()
            })
            .collect();

        samples.push(ReportSample {
            id: format!("s{idx:05}"),
            features,
            report,
            findings,
            abnormal_terms: terms,
        });
    }
    Ok(samples)
}
