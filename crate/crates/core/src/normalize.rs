//! Deterministic token normalization.
//!
//! Every count in the crate (segment token counts, contrast tables, keyword
//! matching) goes through [`normalize`], so a keyword list and the transcripts
//! it filters are always compared in the same token space.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;
use unicode_segmentation::UnicodeSegmentation;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("min_token_length must be at least 1")]
    ZeroMinTokenLength,
    #[error("stoplist entry {0:?} is not a normalized token")]
    UnnormalizedStopword(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizationConfig {
    pub lowercase: bool,
    pub strip_diacritics: bool,
    pub strip_punctuation: bool,
    pub drop_numeric_tokens: bool,
    pub stoplist: BTreeSet<String>,
    pub min_token_length: usize,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            strip_diacritics: true,
            strip_punctuation: true,
            drop_numeric_tokens: true,
            stoplist: BTreeSet::new(),
            min_token_length: 2,
        }
    }
}

impl NormalizationConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.min_token_length == 0 {
            return Err(ConfigError::ZeroMinTokenLength);
        }
        // Stopwords are compared against normalized tokens, so an entry that
        // would itself normalize differently can never match.
        let bare = Self {
            stoplist: BTreeSet::new(),
            min_token_length: 1,
            ..self.clone()
        };
        for word in &self.stoplist {
            if normalize(word, &bare) != [word.as_str()] {
                return Err(ConfigError::UnnormalizedStopword(word.clone()));
            }
        }
        Ok(())
    }
}

/// Splits `text` into normalized tokens.
///
/// Steps run in a fixed order: word segmentation, lowercase, diacritic
/// stripping, punctuation stripping, numeric-token removal, stoplist removal,
/// short-token removal. Each step is skipped when disabled in `config`.
pub fn normalize(text: &str, config: &NormalizationConfig) -> Vec<String> {
    let mut out = Vec::new();
    for piece in text.split_word_bounds() {
        if piece.chars().all(char::is_whitespace) {
            continue;
        }
        let mut token = if config.lowercase {
            piece.to_lowercase()
        } else {
            piece.to_owned()
        };
        if config.strip_diacritics {
            token = strip_diacritics(&token);
        }
        if config.strip_punctuation {
            token.retain(|c| c.is_alphanumeric() || is_combining_mark(c));
        }
        if token.is_empty() {
            continue;
        }
        if config.drop_numeric_tokens && token.chars().all(char::is_numeric) {
            continue;
        }
        if config.stoplist.contains(&token) {
            continue;
        }
        if token.chars().count() < config.min_token_length {
            continue;
        }
        out.push(token);
    }
    out
}

/// Number of tokens [`normalize`] would produce, without keeping them.
pub fn token_count(text: &str, config: &NormalizationConfig) -> usize {
    normalize(text, config).len()
}

/// Returns the normalized form of a single keyword, or `None` when the input
/// does not normalize to exactly one token.
pub fn normalize_keyword(word: &str, config: &NormalizationConfig) -> Option<String> {
    let mut tokens = normalize(word, config);
    if tokens.len() == 1 {
        tokens.pop()
    } else {
        None
    }
}

fn strip_diacritics(s: &str) -> String {
    s.nfd().filter(|c| !is_combining_mark(*c)).nfc().collect()
}
