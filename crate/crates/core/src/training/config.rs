//! Training configuration: schedule, optimizer, reward, and
//! post-processing settings.

use serde::{Deserialize, Serialize};

use crate::error::TrainError;
use crate::model::RolloutLimits;
use crate::numerics::OptimizerKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub xe_epochs: usize,
    pub rl_epochs: usize,
    pub lr_xe: f64,
    pub lr_rl: f64,
    pub batch_size: usize,
    /// Discount for sentence- and word-level returns.
    pub gamma: f64,
    /// Greedy decoding stops once the stop gate reaches this value.
    pub stop_threshold: f64,
    pub baseline: BaselineConfig,
    pub limits: RolloutLimits,
    pub postprocess: PostprocessConfig,
    pub optimizer: OptimizerKind,
    pub grad_clip: Option<f64>,
    /// Give the stop gate the sentence-level return during policy
    /// fine-tuning (it is always trained during cross-entropy).
    pub rl_updates_z: bool,
    /// Weight of an action-entropy bonus in the policy loss; the fallback
    /// when sampling collapses into stopping immediately. Zero disables.
    pub rl_entropy_bonus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    pub enabled: bool,
    pub ema_decay: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig { enabled: true, ema_decay: 0.95 }
    }
}

/// A keyword and the normal-case sentence appended when no sentence in a
/// report mentions the keyword.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordRule {
    pub keyword: String,
    pub sentence: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PostprocessConfig {
    pub enabled: bool,
    /// Checked and appended in order.
    pub keyword_map: Vec<KeywordRule>,
}

impl Default for PostprocessConfig {
    fn default() -> Self {
        let rule = |keyword: &str, sentence: &str| KeywordRule {
            keyword: keyword.to_string(),
            sentence: sentence.to_string(),
        };
        PostprocessConfig {
            enabled: true,
            keyword_map: vec![
                rule(
                    "heart size and mediastinal contours",
                    "the heart size and mediastinal contours are normal .",
                ),
                rule(
                    "pleural effusion or pneumothorax",
                    "there is no pleural effusion or pneumothorax .",
                ),
                rule("consolidation", "no evidence of focal consolidation ."),
                rule("lungs are clear", "the lungs are clear ."),
            ],
        }
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            xe_epochs: 30,
            rl_epochs: 30,
            lr_xe: 3e-3,
            lr_rl: 3e-4,
            batch_size: 16,
            gamma: 0.95,
            stop_threshold: 0.5,
            baseline: BaselineConfig::default(),
            limits: RolloutLimits::default(),
            postprocess: PostprocessConfig::default(),
            optimizer: OptimizerKind::Adam,
            grad_clip: Some(5.0),
            rl_updates_z: true,
            rl_entropy_bonus: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |msg: String| Err(TrainError::BadConfig(msg));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad(format!("gamma must lie in [0, 1], got {}", self.gamma));
        }
        if self.lr_xe <= 0.0 || self.lr_rl <= 0.0 {
            return bad(format!(
                "learning rates must be positive, got lr_xe={} lr_rl={}",
                self.lr_xe, self.lr_rl
            ));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if !(self.stop_threshold > 0.0 && self.stop_threshold <= 1.0) {
            return bad(format!(
                "stop_threshold must lie in (0, 1], got {}",
                self.stop_threshold
            ));
        }
        if !(0.0..1.0).contains(&self.baseline.ema_decay) {
            return bad(format!(
                "baseline ema_decay must lie in [0, 1), got {}",
                self.baseline.ema_decay
            ));
        }
        if self.limits.max_sentences == 0 || self.limits.max_tokens == 0 {
            return bad("limits must allow at least one sentence and one token".into());
        }
        if let Some(clip) = self.grad_clip {
            if clip <= 0.0 {
                return bad(format!("grad_clip must be positive, got {clip}"));
            }
        }
        if self.rl_entropy_bonus < 0.0 {
            return bad(format!(
                "rl_entropy_bonus must be non-negative, got {}",
                self.rl_entropy_bonus
            ));
        }
        for rule in &self.postprocess.keyword_map {
            if rule.keyword.trim().is_empty() {
                return bad("postprocess keywords must be nonempty".into());
            }
            // Appending a sentence that does not itself mention the
            // keyword would make the pass grow reports on every run.
            if !rule.sentence.to_lowercase().contains(&rule.keyword.to_lowercase()) {
                return bad(format!(
                    "postprocess sentence {:?} does not contain its keyword {:?}; \
                     the pass would not be idempotent",
                    rule.sentence, rule.keyword
                ));
            }
        }
        Ok(())
    }
}
