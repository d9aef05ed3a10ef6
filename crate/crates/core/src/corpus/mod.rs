//! Corpus construction: tokenization, vocabulary, template mining, the
//! synthetic report generator, and dataset file I/O.

mod io;
mod sample;
mod synth;
mod templates;
pub mod tokenize;
mod vocab;

pub use io::{
    load_samples_jsonl, load_templates, load_vocab, save_samples_jsonl, save_templates,
    save_vocab,
};
pub use sample::ReportSample;
pub use synth::{
    abnormal_term_list, synth_generate, template_sentence_fraction, SynthConfig,
};
pub use templates::{
    group_templates, mine_templates, TemplateDatabase, TemplateGroup, TemplateVariant,
};
pub use tokenize::{
    default_stop_words, is_punctuation, normalize_sentence, normalize_tokens, tokenize,
};
pub use vocab::{Vocabulary, BOS, BOS_TOKEN, EOS, EOS_TOKEN, PAD, PAD_TOKEN, UNK, UNK_TOKEN};
