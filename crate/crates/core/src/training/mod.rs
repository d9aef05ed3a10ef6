//! Training and evaluation: cross-entropy pretraining, policy-gradient
//! fine-tuning with delta-score rewards, report post-processing, and
//! split evaluation.

mod config;
mod driver;
mod evaluate;
mod logs;
mod postprocess;
mod rl;
mod xe;

pub use config::{BaselineConfig, KeywordRule, PostprocessConfig, TrainConfig};
pub use driver::{train_full, TrainRun};
pub use evaluate::{
    collect_term_list, evaluate_split, score_reports, ActionMix, EvalOutcome, MetricsReport,
    SampleOutput, SentenceOutput,
};
pub use logs::{append_logs, EpochLog, Phase};
pub use postprocess::postprocess_report;
pub use rl::{policy_loss, rl_trainable, train_rl_epoch, Baselines, RlEpochStats};
pub use xe::{sample_xe_loss, train_xe, XeContext};
