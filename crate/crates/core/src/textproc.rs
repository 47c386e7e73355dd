//! Text normalization: lowercasing, word tokens, stopword removal and n-grams.
//!
//! A token is a maximal run of at least two alphanumeric characters; anything
//! else separates tokens. Stopwords are removed before n-grams are formed, so
//! no bigram ever spans a removed word's position.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The bundled English stopword list, one lowercase word per line, sorted.
pub const STOPWORDS_EN: &str = include_str!("../data/stopwords_en.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stopwords {
    English,
    None,
    Custom(BTreeSet<String>),
}

impl Stopwords {
    fn to_set(&self) -> HashSet<String> {
        match self {
            Stopwords::English => STOPWORDS_EN.lines().map(String::from).collect(),
            Stopwords::None => HashSet::new(),
            Stopwords::Custom(words) => words.iter().cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub stopwords: Stopwords,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            ngram_min: 1,
            ngram_max: 2,
            stopwords: Stopwords::English,
        }
    }
}

impl TokenizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1 <= self.ngram_min && self.ngram_min <= self.ngram_max && self.ngram_max <= 2) {
            return Err(Error::InvalidParameter(format!(
                "ngram range ({}, {}) must satisfy 1 <= min <= max <= 2",
                self.ngram_min, self.ngram_max
            )));
        }
        Ok(())
    }
}

pub fn tokenize(text: &str, cfg: &TokenizerConfig) -> Vec<String> {
    let lowered;
    let text = if cfg.lowercase {
        lowered = text.to_lowercase();
        lowered.as_str()
    } else {
        text
    };
    let mut tokens = Vec::new();
    let mut start = None;
    let mut run_chars = 0usize;
    for (i, c) in text.char_indices() {
        if c.is_alphanumeric() {
            if start.is_none() {
                start = Some(i);
                run_chars = 0;
            }
            run_chars += 1;
        } else if let Some(s) = start.take() {
            if run_chars >= 2 {
                tokens.push(text[s..i].to_string());
            }
        }
    }
    if let Some(s) = start {
        if run_chars >= 2 {
            tokens.push(text[s..].to_string());
        }
    }
    tokens
}

pub fn remove_stopwords(tokens: Vec<String>, stopwords: &HashSet<String>) -> Vec<String> {
    tokens.into_iter().filter(|t| !stopwords.contains(t)).collect()
}

/// Unigrams in order, then bigrams in order (when the range asks for them).
pub fn ngrams(tokens: &[String], ngram_min: usize, ngram_max: usize) -> Vec<String> {
    let mut terms = Vec::with_capacity(tokens.len() * 2);
    if ngram_min <= 1 && ngram_max >= 1 {
        terms.extend(tokens.iter().cloned());
    }
    if ngram_min <= 2 && ngram_max >= 2 {
        terms.extend(tokens.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    }
    terms
}

/// A tokenizer config with its stopword set materialized.
#[derive(Debug, Clone)]
pub struct TextProcessor {
    cfg: TokenizerConfig,
    stopwords: HashSet<String>,
}

impl TextProcessor {
    pub fn new(cfg: TokenizerConfig) -> Result<Self> {
        cfg.validate()?;
        let stopwords = cfg.stopwords.to_set();
        Ok(Self { cfg, stopwords })
    }

    pub fn config(&self) -> &TokenizerConfig {
        &self.cfg
    }

    pub fn tokens(&self, text: &str) -> Vec<String> {
        tokenize(text, &self.cfg)
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }

    /// Full pipeline: tokenize, drop stopwords, expand to n-gram terms.
    pub fn terms(&self, text: &str) -> Vec<String> {
        let tokens = remove_stopwords(self.tokens(text), &self.stopwords);
        ngrams(&tokens, self.cfg.ngram_min, self.cfg.ngram_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn english() -> HashSet<String> {
        Stopwords::English.to_set()
    }

    #[test]
    fn stopword_file_shape() {
        let words: Vec<&str> = STOPWORDS_EN.lines().collect();
        assert_eq!(words.len(), 318);
        assert!(words.windows(2).all(|w| w[0] < w[1]));
        assert!(words.iter().all(|w| *w == w.to_lowercase()));
    }

    #[test]
    fn tokenize_examples() {
        let cfg = TokenizerConfig::default();
        assert_eq!(tokenize("I love Deagan's. I do.", &cfg), strings(&["love", "deagan", "do"]));
        assert!(tokenize("", &cfg).is_empty());
        assert_eq!(tokenize("ABC abc", &cfg), strings(&["abc", "abc"]));
        assert_eq!(tokenize("café 42nd-st", &cfg), strings(&["café", "42nd", "st"]));
    }

    #[test]
    fn tokenize_without_lowercasing() {
        let cfg = TokenizerConfig {
            lowercase: false,
            ..TokenizerConfig::default()
        };
        assert_eq!(tokenize("ABC abc", &cfg), strings(&["ABC", "abc"]));
    }

    #[test]
    fn stopword_examples() {
        let sw = english();
        assert_eq!(remove_stopwords(strings(&["love", "the", "food"]), &sw), strings(&["love", "food"]));
        assert!(remove_stopwords(vec![], &sw).is_empty());
        assert!(remove_stopwords(strings(&["a", "the"]), &sw).is_empty());
    }

    #[test]
    fn ngram_examples() {
        assert_eq!(ngrams(&strings(&["good", "food"]), 1, 2), strings(&["good", "food", "good food"]));
        assert_eq!(ngrams(&strings(&["good"]), 1, 2), strings(&["good"]));
        assert_eq!(
            ngrams(&strings(&["a", "b", "c"]), 1, 2),
            strings(&["a", "b", "c", "a b", "b c"])
        );
        assert_eq!(ngrams(&strings(&["a", "b"]), 2, 2), strings(&["a b"]));
        assert_eq!(ngrams(&strings(&["a", "b"]), 1, 1), strings(&["a", "b"]));
    }

    #[test]
    fn stopwords_removed_before_bigrams() {
        let p = TextProcessor::new(TokenizerConfig::default()).unwrap();
        assert_eq!(p.terms("not good"), strings(&["good"]));
        assert_eq!(p.terms("food was really great"), strings(&["food", "really", "great", "food really", "really great"]));
    }

    #[test]
    fn invalid_range_rejected() {
        let cfg = TokenizerConfig {
            ngram_min: 2,
            ngram_max: 1,
            ..TokenizerConfig::default()
        };
        assert!(TextProcessor::new(cfg).is_err());
        let cfg = TokenizerConfig {
            ngram_max: 3,
            ..TokenizerConfig::default()
        };
        assert!(TextProcessor::new(cfg).is_err());
    }

    proptest! {
        #[test]
        fn retokenizing_joined_tokens_is_idempotent(text in "\\PC{0,80}") {
            let cfg = TokenizerConfig::default();
            let tokens = tokenize(&text, &cfg);
            prop_assert_eq!(tokenize(&tokens.join(" "), &cfg), tokens);
        }

        #[test]
        fn ngram_count_and_alphabet(text in "[a-zA-Z0-9 .,'!é]{0,120}") {
            let p = TextProcessor::new(TokenizerConfig::default()).unwrap();
            let tokens = remove_stopwords(p.tokens(&text), &english());
            let terms = ngrams(&tokens, 1, 2);
            prop_assert_eq!(terms.len(), tokens.len() + tokens.len().saturating_sub(1));
            for t in &terms {
                prop_assert!(!t.starts_with(' ') && !t.ends_with(' ') && !t.contains("  "));
                prop_assert!(t.chars().all(|c| c.is_alphanumeric() || c == ' '));
            }
        }
    }
}
