//! `gen-data`: synthesize the corpus and write disjoint dataset splits.

use hrgr_core::corpus::{save_samples_jsonl, template_sentence_fraction};
use hrgr_core::numerics::Rng;

use crate::artifacts::OutDir;
use crate::config::{echo_config, RunConfig};
use crate::errors::AppError;

pub fn gen_data(
    config: &RunConfig,
    seed: u64,
    out: &OutDir,
    force: bool,
) -> Result<(), AppError> {
    let files = [
        out.split_file("train"),
        out.split_file("val"),
        out.split_file("test"),
    ];
    out.refuse_overwrite(&files, force)?;

    let mut rng = Rng::new(seed);
    let mut samples = hrgr_core::corpus::synth_generate(&config.synth, &mut rng)?;
    let (n_train, n_val, n_test) = config.split.counts(samples.len());
    if n_train == 0 || n_val == 0 || n_test == 0 {
        return Err(AppError::config(format!(
            "split of {} samples produces an empty subset \
             (train {n_train}, val {n_val}, test {n_test}); \
             raise synth.n_samples or adjust the ratios",
            samples.len()
        )));
    }

    // Sample ids are unique by construction, so contiguous slices of a
    // shuffled corpus give id-disjoint splits.
    rng.shuffle(&mut samples);
    let (train, rest) = samples.split_at(n_train);
    let (val, test) = rest.split_at(n_val);

    for (path, split) in files.iter().zip([train, val, test]) {
        save_samples_jsonl(path, split)?;
    }
    echo_config(out.root(), config)?;

    println!(
        "wrote {} train / {} val / {} test samples to {}",
        train.len(),
        val.len(),
        test.len(),
        out.root().display()
    );
    println!(
        "template-bank sentences: {:.1}% of the corpus",
        100.0 * template_sentence_fraction(&samples)
    );
    Ok(())
}
