//! Token vocabulary with reserved special ids.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::CorpusError;

pub const PAD: u32 = 0;
pub const BOS: u32 = 1;
pub const EOS: u32 = 2;
pub const UNK: u32 = 3;

pub const PAD_TOKEN: &str = "<pad>";
pub const BOS_TOKEN: &str = "<bos>";
pub const EOS_TOKEN: &str = "<eos>";
pub const UNK_TOKEN: &str = "<unk>";

const SPECIALS: [&str; 4] = [PAD_TOKEN, BOS_TOKEN, EOS_TOKEN, UNK_TOKEN];

/// Bidirectional token/id map. Ids 0..=3 are reserved; content tokens get
/// ids from 4 upward ordered by (frequency desc, token asc) at build time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabFile", into = "VocabFile")]
pub struct Vocabulary {
    id_to_token: Vec<String>,
    token_to_id: BTreeMap<String, u32>,
    min_freq: usize,
}

/// On-disk form: the token list in id order plus the build threshold.
#[derive(Serialize, Deserialize)]
struct VocabFile {
    tokens: Vec<String>,
    min_freq: usize,
}

impl From<Vocabulary> for VocabFile {
    fn from(v: Vocabulary) -> Self {
        VocabFile {
            tokens: v.id_to_token,
            min_freq: v.min_freq,
        }
    }
}

impl TryFrom<VocabFile> for Vocabulary {
    type Error = String;

    fn try_from(f: VocabFile) -> Result<Self, String> {
        if f.tokens.len() < SPECIALS.len() {
            return Err(format!(
                "vocabulary file lists {} tokens; the {} special tokens are mandatory",
                f.tokens.len(),
                SPECIALS.len()
            ));
        }
        for (i, special) in SPECIALS.iter().enumerate() {
            if f.tokens[i] != *special {
                return Err(format!(
                    "vocabulary id {i} must be {special:?}, found {:?}",
                    f.tokens[i]
                ));
            }
        }
        let mut token_to_id = BTreeMap::new();
        for (id, token) in f.tokens.iter().enumerate() {
            if token_to_id.insert(token.clone(), id as u32).is_some() {
                return Err(format!("duplicate token {token:?} in vocabulary file"));
            }
        }
        Ok(Vocabulary {
            id_to_token: f.tokens,
            token_to_id,
            min_freq: f.min_freq,
        })
    }
}

impl Vocabulary {
    /// Build from sentences of a training corpus, keeping tokens that occur
    /// at least `min_freq` times. Ids are assigned by descending frequency
    /// with ties broken alphabetically.
    pub fn build<'a, I>(sentences: I, min_freq: usize) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        if min_freq == 0 {
            return Err(CorpusError::BadConfig("min_freq must be >= 1".into()));
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        let mut saw_any = false;
        for sentence in sentences {
            saw_any = true;
            for token in sentence {
                *counts.entry(token).or_insert(0) += 1;
            }
        }
        if !saw_any {
            return Err(CorpusError::EmptyCorpus);
        }

        let mut kept: Vec<(&str, usize)> = counts
            .into_iter()
            .filter(|(_, c)| *c >= min_freq)
            .collect();
        kept.sort_by(|(ta, ca), (tb, cb)| cb.cmp(ca).then(ta.cmp(tb)));

        let mut id_to_token: Vec<String> = SPECIALS.iter().map(|s| s.to_string()).collect();
        id_to_token.extend(kept.into_iter().map(|(t, _)| t.to_string()));
        let token_to_id = id_to_token
            .iter()
            .enumerate()
            .map(|(id, t)| (t.clone(), id as u32))
            .collect();
        Ok(Vocabulary {
            id_to_token,
            token_to_id,
            min_freq,
        })
    }

    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min_freq(&self) -> usize {
        self.min_freq
    }

    pub fn contains(&self, token: &str) -> bool {
        self.token_to_id.contains_key(token)
    }

    /// Id for a token, falling back to UNK.
    pub fn id(&self, token: &str) -> u32 {
        self.token_to_id.get(token).copied().unwrap_or(UNK)
    }

    /// Token for an id; out-of-range ids render as the UNK token.
    pub fn token(&self, id: u32) -> &str {
        self.id_to_token
            .get(id as usize)
            .map(|s| s.as_str())
            .unwrap_or(UNK_TOKEN)
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<u32> {
        tokens.iter().map(|t| self.id(t)).collect()
    }

    pub fn decode(&self, ids: &[u32]) -> Vec<String> {
        ids.iter().map(|&i| self.token(i).to_string()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sent(s: &str) -> Vec<String> {
        s.split_whitespace().map(|t| t.to_string()).collect()
    }

    #[test]
    fn threshold_filters_rare_tokens() {
        let s = sent("a a a b");
        let v = Vocabulary::build([s.as_slice()], 3).unwrap();
        assert!(v.contains("a"));
        assert!(!v.contains("b"));
        assert_eq!(v.id("b"), UNK);
    }

    #[test]
    fn min_freq_one_keeps_every_token() {
        let s = sent("x y z z");
        let v = Vocabulary::build([s.as_slice()], 1).unwrap();
        for t in ["x", "y", "z"] {
            assert!(v.contains(t), "missing {t}");
        }
        assert_eq!(v.len(), 4 + 3);
    }

    #[test]
    fn specials_occupy_fixed_ids() {
        let s = sent("w");
        let v = Vocabulary::build([s.as_slice()], 1).unwrap();
        assert_eq!(v.token(PAD), PAD_TOKEN);
        assert_eq!(v.token(BOS), BOS_TOKEN);
        assert_eq!(v.token(EOS), EOS_TOKEN);
        assert_eq!(v.token(UNK), UNK_TOKEN);
        assert_eq!(v.id("w"), 4);
    }

    #[test]
    fn ids_ordered_by_frequency_then_token() {
        let s = sent("b b b c c a a");
        let v = Vocabulary::build([s.as_slice()], 1).unwrap();
        assert_eq!(v.id("b"), 4); // freq 3
        assert_eq!(v.id("a"), 5); // freq 2, 'a' < 'c'
        assert_eq!(v.id("c"), 6);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let out = Vocabulary::build(std::iter::empty::<&[String]>(), 1);
        assert!(matches!(out, Err(CorpusError::EmptyCorpus)));
    }

    #[test]
    fn encode_decode_round_trip_known_tokens() {
        let s = sent("alpha beta gamma");
        let v = Vocabulary::build([s.as_slice()], 1).unwrap();
        let ids = v.encode(&s);
        assert_eq!(v.decode(&ids), s);
    }

    #[test]
    fn json_round_trip_preserves_ids() {
        let s = sent("m n n o o o");
        let v = Vocabulary::build([s.as_slice()], 2).unwrap();
        let text = serde_json::to_string(&v).unwrap();
        let back: Vocabulary = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
        assert!(text.contains("min_freq"));
    }

    #[test]
    fn corrupt_specials_rejected_on_load() {
        let text = r#"{"tokens": ["<pad>", "<bos>", "<eos>", "wrong"], "min_freq": 1}"#;
        assert!(serde_json::from_str::<Vocabulary>(text).is_err());
    }
}
