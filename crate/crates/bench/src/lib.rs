//! Shared fixtures for the benchmark suite. The crate exists only to host
//! `benches/`; it exposes helpers for building a small trained-shape world
//! without duplicating setup in every benchmark.

use hrgr_core::corpus::{
    default_stop_words, group_templates, mine_templates, synth_generate, ReportSample,
    SynthConfig, TemplateDatabase, Vocabulary,
};
use hrgr_core::model::{Dims, ModelParameters};
use hrgr_core::numerics::Rng;

pub struct BenchWorld {
    pub samples: Vec<ReportSample>,
    pub templates: TemplateDatabase,
    pub vocab: Vocabulary,
    pub params: ModelParameters,
}

/// Corpus, template database, vocabulary, and freshly initialized
/// parameters at the given width.
pub fn bench_world(n_samples: usize, d_hidden: usize) -> BenchWorld {
    let config = SynthConfig { n_samples, ..SynthConfig::default() };
    let samples = synth_generate(&config, &mut Rng::new(99)).unwrap();
    let docs: Vec<Vec<Vec<String>>> = samples.iter().map(|s| s.sentence_tokens()).collect();
    let threshold = (n_samples / 100).max(2);
    let templates = group_templates(mine_templates(&docs, threshold), threshold, &default_stop_words());
    let sentences: Vec<Vec<String>> = docs.into_iter().flatten().collect();
    let vocab = Vocabulary::build(sentences.iter().map(|s| s.as_slice()), 1).unwrap();
    let dims = Dims {
        d_hidden,
        d_embed: d_hidden,
        regions: config.regions,
        d_feat: config.feat_dim,
        vocab_size: vocab.len(),
        n_templates: templates.len(),
    };
    let params = ModelParameters::init(dims, &mut Rng::new(1));
    BenchWorld { samples, templates, vocab, params }
}
