//! `mine-templates`: extract the template database and vocabulary from the
//! training split, printing a per-group summary table.

use hrgr_core::corpus::{
    default_stop_words, group_templates, mine_templates as mine_candidates, save_templates,
    save_vocab, Vocabulary,
};
use hrgr_core::error::CorpusError;

use crate::artifacts::OutDir;
use crate::config::{echo_config, RunConfig};
use crate::errors::AppError;

pub fn mine_templates(config: &RunConfig, out: &OutDir, force: bool) -> Result<(), AppError> {
    out.refuse_overwrite(&[out.templates(), out.vocab()], force)?;

    let train = out.load_split("train")?;
    let docs: Vec<Vec<Vec<String>>> = train.iter().map(|s| s.sentence_tokens()).collect();
    let threshold = config.df_threshold(docs.len());

    let candidates = mine_candidates(&docs, threshold);
    let db = group_templates(candidates, threshold, &default_stop_words());
    if db.is_empty() {
        return Err(CorpusError::NoTemplates { threshold, n_docs: docs.len() }.into());
    }

    let sentences: Vec<Vec<String>> = docs.into_iter().flatten().collect();
    let vocab = Vocabulary::build(
        sentences.iter().map(|s| s.as_slice()),
        config.vocab_min_freq,
    )?;

    save_templates(&out.templates(), &db)?;
    save_vocab(&out.vocab(), &vocab)?;
    echo_config(out.root(), config)?;

    let n_docs = train.len() as f64;
    println!(
        "mined {} template groups (df threshold {} of {} documents); vocabulary {} tokens",
        db.len(),
        threshold,
        train.len(),
        vocab.len()
    );
    println!("{:>5}  {:>8}  {:>6}  {:>6}  canonical", "group", "variants", "df", "df%");
    for (i, group) in db.groups.iter().enumerate() {
        println!(
            "{:>5}  {:>8}  {:>6}  {:>5.1}%  {}",
            i + 1,
            group.variants.len(),
            group.total_df(),
            100.0 * group.total_df() as f64 / n_docs,
            group.canonical_text()
        );
    }
    Ok(())
}
