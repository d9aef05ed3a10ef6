//! Hierarchical report generation with hybrid retrieval and word-level
//! decoding, trained by cross-entropy and policy-gradient fine-tuning.
//!
//! The crate is organized bottom-up:
//!
//! - [`numerics`]: dense arrays, a reverse-mode autodiff tape, optimizers,
//!   and a deterministic RNG;
//! - [`corpus`]: tokenization, vocabulary, template mining, synthetic data
//!   generation, and JSONL dataset I/O;
//! - [`metrics`]: n-gram consensus and overlap scorers plus per-sentence /
//!   per-word reward shaping and clinical term detection;
//! - [`model`]: the visual encoder, sentence-level decoder with soft
//!   attention, the retrieve-or-generate policy, and the word generator;
//! - [`training`]: cross-entropy and reinforcement training loops,
//!   evaluation, and report post-processing.

pub mod corpus;
pub mod error;
pub mod metrics;
pub mod model;
pub mod numerics;
pub mod training;
