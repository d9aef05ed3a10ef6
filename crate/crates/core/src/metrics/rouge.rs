//! ROUGE-L: longest-common-subsequence F-measure.

/// LCS length via the classic two-row dynamic program.
fn lcs_len(a: &[String], b: &[String]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut curr = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            curr[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Per-document LCS F-measure: P = lcs/|cand|, R = lcs/|ref|,
/// F = (1+beta^2)RP / (R + beta^2 P).
pub fn rouge_l_doc(candidate: &[String], reference: &[String], beta: f64) -> f64 {
    let lcs = lcs_len(candidate, reference) as f64;
    if lcs == 0.0 {
        return 0.0;
    }
    let p = lcs / candidate.len() as f64;
    let r = lcs / reference.len() as f64;
    let b2 = beta * beta;
    (1.0 + b2) * r * p / (r + b2 * p)
}

/// Mean document F-measure over the corpus.
pub fn rouge_l(candidates: &[Vec<String>], references: &[Vec<String>], beta: f64) -> f64 {
    assert_eq!(candidates.len(), references.len());
    if candidates.is_empty() {
        return 0.0;
    }
    let total: f64 = candidates
        .iter()
        .zip(references)
        .map(|(c, r)| rouge_l_doc(c, r, beta))
        .sum();
    total / candidates.len() as f64
}

pub const DEFAULT_ROUGE_BETA: f64 = 1.2;
