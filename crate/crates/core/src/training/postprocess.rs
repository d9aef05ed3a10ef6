//! Report post-processing: pad out reports with canonical normal-case
//! sentences for aspects the model never mentioned.

use super::config::KeywordRule;

/// Append the mapped sentence for every keyword that no sentence in the
/// report mentions. Matching is a case-insensitive substring test on the
/// space-joined token text, so multi-word keywords match across token
/// boundaries. Rules fire in map order.
///
/// Reports are sentence token lists; appended sentences are tokenized on
/// whitespace (rule sentences are written pre-tokenized).
pub fn postprocess_report(
    report: &[Vec<String>],
    keyword_map: &[KeywordRule],
) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = report.to_vec();
    for rule in keyword_map {
        let needle = rule.keyword.to_lowercase();
        let mentioned = out
            .iter()
            .any(|sentence| sentence.join(" ").to_lowercase().contains(&needle));
        if !mentioned {
            out.push(rule.sentence.split_whitespace().map(str::to_string).collect());
        }
    }
    out
}
