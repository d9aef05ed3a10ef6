//! Corpus-level BLEU with modified (clipped) n-gram precision.

use crate::metrics::ngram::ngram_counts;

/// BLEU over a corpus using orders 1..=max_n: geometric mean of clipped
/// precisions times the brevity penalty exp(1 - r/c) when c < r.
pub fn bleu(candidates: &[Vec<String>], references: &[Vec<String>], max_n: usize) -> f64 {
    assert!((1..=4).contains(&max_n), "max_n must be in 1..=4");
    assert_eq!(candidates.len(), references.len());

    let mut matched = vec![0.0f64; max_n];
    let mut possible = vec![0.0f64; max_n];
    let mut cand_len = 0usize;
    let mut ref_len = 0usize;

    for (cand, reference) in candidates.iter().zip(references) {
        cand_len += cand.len();
        ref_len += reference.len();
        for n in 1..=max_n {
            let c_counts = ngram_counts(cand, n);
            let r_counts = ngram_counts(reference, n);
            for (gram, c) in &c_counts {
                let r = r_counts.get(gram).copied().unwrap_or(0.0);
                matched[n - 1] += c.min(r);
            }
            possible[n - 1] += cand.len().saturating_sub(n - 1) as f64;
        }
    }

    if cand_len == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 0..max_n {
        if matched[n] == 0.0 || possible[n] == 0.0 {
            return 0.0;
        }
        log_sum += (matched[n] / possible[n]).ln();
    }
    let precision = (log_sum / max_n as f64).exp();
    let bp = if cand_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };
    bp * precision
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(|t| t.to_string()).collect()
    }

    #[test]
    fn identical_corpus_is_exactly_one() {
        let refs = vec![toks("a b c d"), toks("e f g")];
        for n in 1..=4 {
            assert_eq!(bleu(&refs, &refs, n), 1.0);
        }
    }

    #[test]
    fn clipping_limits_repeated_tokens() {
        // "a a a" vs "a": unigram matches clipped to 1 of 3.
        let cands = vec![toks("a a a")];
        let refs = vec![toks("a")];
        // Candidate longer than reference: BP = 1.
        let score = bleu(&cands, &refs, 1);
        assert!((score - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn brevity_penalty_at_half_length() {
        // Perfect precision from a half-length candidate: BP = e^{-1}.
        let cands = vec![toks("a b")];
        let refs = vec![toks("a b c d")];
        let score = bleu(&cands, &refs, 1);
        assert!((score - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn zero_overlap_is_zero() {
        let cands = vec![toks("x y")];
        let refs = vec![toks("a b")];
        assert_eq!(bleu(&cands, &refs, 2), 0.0);
    }

    #[test]
    fn empty_candidates_score_zero() {
        let cands = vec![Vec::new()];
        let refs = vec![toks("a b")];
        assert_eq!(bleu(&cands, &refs, 1), 0.0);
    }
}
