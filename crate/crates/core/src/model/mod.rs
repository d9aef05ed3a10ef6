//! Hierarchical report generator: a region encoder feeds a sentence-level
//! recurrent decoder whose per-sentence topic state drives a retrieval
//! policy; each sentence is then either copied from a template group or
//! generated word-by-word by an attention-equipped recurrent generator.

mod checkpoint;
mod forward;
mod params;
mod report;

pub use checkpoint::{fnv1a64, load_checkpoint, save_checkpoint, CheckpointMeta};
pub use forward::{argmax, EncodedRegions, Forward, TopicHidden, TopicStep};
pub use params::{Dims, ModelParameters, GRU_GATES};
pub use report::{
    rollout, ActionConstraint, DecodeMode, EpisodeTrace, RolloutLimits, RolloutOptions,
    SentenceRecord, SentenceSource,
};
