//! Text tokenization and the normalization used for template grouping.

/// Default function-word stop list used when normalizing sentences for
/// template grouping. Configurable at every call site.
pub const DEFAULT_STOP_WORDS: &[&str] = &["the", "there", "is", "are", "a", "an", "of"];

/// Lowercase a string and split it into word and punctuation tokens.
/// Punctuation characters become standalone tokens; whitespace separates.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    for ch in text.chars() {
        if ch.is_whitespace() {
            flush(&mut word, &mut tokens);
        } else if ch.is_alphanumeric() {
            for lc in ch.to_lowercase() {
                word.push(lc);
            }
        } else {
            flush(&mut word, &mut tokens);
            tokens.push(ch.to_string());
        }
    }
    flush(&mut word, &mut tokens);
    tokens
}

fn flush(word: &mut String, tokens: &mut Vec<String>) {
    if !word.is_empty() {
        tokens.push(std::mem::take(word));
    }
}

/// True when a token consists only of punctuation characters.
pub fn is_punctuation(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| !c.is_alphanumeric())
}

/// Reduce a token sequence to its content words: drop punctuation tokens
/// and stop-list words. Token order is preserved, so sentences that differ
/// in word order normalize differently.
pub fn normalize_tokens(tokens: &[String], stop_words: &[String]) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| !is_punctuation(t) && !stop_words.iter().any(|s| s == *t))
        .cloned()
        .collect()
}

/// Normalized key for a raw sentence string: tokenize, then strip
/// punctuation and stop words, and rejoin with single spaces.
pub fn normalize_sentence(text: &str, stop_words: &[String]) -> String {
    normalize_tokens(&tokenize(text), stop_words).join(" ")
}

/// Owned copy of the default stop list.
pub fn default_stop_words() -> Vec<String> {
    DEFAULT_STOP_WORDS.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_words_and_trailing_punctuation() {
        assert_eq!(
            tokenize("The lungs are clear."),
            vec!["the", "lungs", "are", "clear", "."]
        );
    }

    #[test]
    fn empty_string_gives_empty_sequence() {
        assert_eq!(tokenize(""), Vec::<String>::new());
    }

    #[test]
    fn multiword_clinical_sentence() {
        assert_eq!(
            tokenize("No pneumothorax or pleural effusion."),
            vec!["no", "pneumothorax", "or", "pleural", "effusion", "."]
        );
    }

    #[test]
    fn interior_punctuation_and_case() {
        assert_eq!(
            tokenize("Heart: SIZE normal, stable."),
            vec!["heart", ":", "size", "normal", ",", "stable", "."]
        );
    }

    #[test]
    fn tokenize_is_idempotent_on_joined_output() {
        let toks = tokenize("There is no pleural effusion.");
        let rejoined = toks.join(" ");
        assert_eq!(tokenize(&rejoined), toks);
    }

    #[test]
    fn normalization_strips_stop_words_and_punctuation() {
        let stop = default_stop_words();
        assert_eq!(
            normalize_sentence("There is no pleural effusion or pneumothorax.", &stop),
            "no pleural effusion or pneumothorax"
        );
        assert_eq!(
            normalize_sentence("No pleural effusion or pneumothorax.", &stop),
            "no pleural effusion or pneumothorax"
        );
    }

    #[test]
    fn word_order_differences_survive_normalization() {
        let stop = default_stop_words();
        let a = normalize_sentence("no pneumothorax or pleural effusion .", &stop);
        let b = normalize_sentence("no pleural effusion or pneumothorax .", &stop);
        assert_ne!(a, b);
    }
}
