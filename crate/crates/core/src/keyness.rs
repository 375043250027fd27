//! Contrastive keyword ranking.
//!
//! Tokens inside gold message spans are counted against tokens everywhere
//! else, and each vocabulary item is scored with a smoothed log ratio of
//! relative frequencies:
//!
//! ```text
//! score(w) = ln((m(w) + a) / (M + aV)) - ln((b(w) + a) / (B + aV))
//! ```
//!
//! where `m`/`b` are per-token message/background counts, `M`/`B` their
//! totals, `V` the vocabulary size and `a` a Dirichlet pseudo-count. With
//! `a > 0` every score is finite, including for tokens never seen in the
//! background.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{BufRead, Write};

use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codebook::{validate_annotation, MessageAnnotation, Span};
use crate::corpus::Corpus;
use crate::normalize::{normalize, normalize_keyword, NormalizationConfig};

pub const DEFAULT_ALPHA: f64 = 0.5;

/// Candidate list sizes 100, 105, ..., 150.
pub fn default_size_grid() -> Vec<usize> {
    (100..=150).step_by(5).collect()
}

#[derive(Debug, Error, PartialEq)]
pub enum KeynessError {
    #[error("annotation {id:?} is not a validated message: {reason}")]
    UnvalidatedAnnotation { id: String, reason: String },
    #[error("no tokens inside message spans")]
    EmptyMessageSide,
    #[error("no background tokens")]
    EmptyBackground,
    #[error("smoothing pseudo-count must be positive and finite")]
    InvalidAlpha,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContrastTable {
    pub vocabulary: BTreeSet<String>,
    pub message_counts: BTreeMap<String, u64>,
    pub background_counts: BTreeMap<String, u64>,
    pub message_total: u64,
    pub background_total: u64,
}

impl ContrastTable {
    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn message_count(&self, token: &str) -> u64 {
        self.message_counts.get(token).copied().unwrap_or(0)
    }

    pub fn background_count(&self, token: &str) -> u64 {
        self.background_counts.get(token).copied().unwrap_or(0)
    }

    fn add(&mut self, token: String, in_message: bool) {
        let (counts, total) = if in_message {
            (&mut self.message_counts, &mut self.message_total)
        } else {
            (&mut self.background_counts, &mut self.background_total)
        };
        *total += 1;
        *counts.entry(token.clone()).or_insert(0) += 1;
        self.vocabulary.insert(token);
    }

    /// Merges counts from another table; merging is commutative, so tables
    /// built per transcript can be combined in any order.
    pub fn merge(&mut self, other: ContrastTable) {
        for (t, n) in other.message_counts {
            *self.message_counts.entry(t).or_insert(0) += n;
        }
        for (t, n) in other.background_counts {
            *self.background_counts.entry(t).or_insert(0) += n;
        }
        self.vocabulary.extend(other.vocabulary);
        self.message_total += other.message_total;
        self.background_total += other.background_total;
    }
}

/// Counts every token occurrence in `corpus` as message (inside at least one
/// gold span) or background (everything else).
pub fn build_contrast_table(
    corpus: &Corpus,
    gold: &[MessageAnnotation],
    config: &NormalizationConfig,
) -> Result<ContrastTable, KeynessError> {
    let mut spans: HashMap<&str, Vec<Span>> = HashMap::new();
    for ann in gold {
        let unvalidated = |reason: String| KeynessError::UnvalidatedAnnotation {
            id: ann.id.clone(),
            reason,
        };
        if !ann.decision.is_message() {
            return Err(unvalidated("decision is not a message".into()));
        }
        let transcript = corpus
            .transcript(&ann.transcript_id)
            .ok_or_else(|| unvalidated(format!("unknown transcript {:?}", ann.transcript_id)))?;
        let report = validate_annotation(ann, transcript).map_err(|e| unvalidated(e.to_string()))?;
        if let Some(v) = report.violations.first() {
            return Err(unvalidated(v.to_string()));
        }
        spans.entry(ann.transcript_id.as_str()).or_default().push(ann.span);
    }

    let mut table = ContrastTable::default();
    for t in &corpus.transcripts {
        let t_spans = spans.get(t.id.as_str()).map(Vec::as_slice).unwrap_or(&[]);
        for seg in &t.segments {
            let in_message = t_spans.iter().any(|s| s.contains(seg.index));
            for token in normalize(&seg.text, config) {
                table.add(token, in_message);
            }
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordScore<F = f64> {
    pub token: String,
    pub score: F,
    pub message_count: u64,
    pub background_count: u64,
}

/// Smoothed log relative-frequency ratio for a single token.
pub fn keyness_score<F: Float>(
    message_count: u64,
    message_total: u64,
    background_count: u64,
    background_total: u64,
    vocabulary_size: usize,
    alpha: F,
) -> F {
    let f = |n: u64| F::from(n).expect("count fits in float");
    let smoothing = alpha * F::from(vocabulary_size).expect("vocabulary size fits in float");
    let p_message = (f(message_count) + alpha) / (f(message_total) + smoothing);
    let p_background = (f(background_count) + alpha) / (f(background_total) + smoothing);
    p_message.ln() - p_background.ln()
}

/// Scores the whole vocabulary and ranks it: score descending, then higher
/// message count, then token order.
pub fn score_keywords<F: Float>(table: &ContrastTable, alpha: F) -> Result<Vec<KeywordScore<F>>, KeynessError> {
    if !(alpha > F::zero() && alpha.is_finite()) {
        return Err(KeynessError::InvalidAlpha);
    }
    if table.message_total == 0 {
        return Err(KeynessError::EmptyMessageSide);
    }
    if table.background_total == 0 {
        return Err(KeynessError::EmptyBackground);
    }
    let v = table.vocabulary_size();
    let mut ranked: Vec<KeywordScore<F>> = table
        .vocabulary
        .iter()
        .map(|token| {
            let m = table.message_count(token);
            let b = table.background_count(token);
            KeywordScore {
                token: token.clone(),
                score: keyness_score(m, table.message_total, b, table.background_total, v, alpha),
                message_count: m,
                background_count: b,
            }
        })
        .collect();
    ranked.sort_by(compare_ranked);
    Ok(ranked)
}

fn compare_ranked<F: Float>(a: &KeywordScore<F>, b: &KeywordScore<F>) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| b.message_count.cmp(&a.message_count))
        .then_with(|| a.token.cmp(&b.token))
}

/// An ordered, duplicate-free set of normalized keywords.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordList {
    pub name: String,
    keywords: Vec<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KeywordListError {
    #[error("keyword {0:?} appears more than once")]
    Duplicate(String),
    #[error("line {line}: {word:?} is not a single normalized token")]
    NotNormalized { line: usize, word: String },
    #[error("io error: {0}")]
    Io(String),
}

impl KeywordList {
    pub fn new(name: impl Into<String>, keywords: Vec<String>) -> Result<Self, KeywordListError> {
        let mut seen = HashSet::new();
        for k in &keywords {
            if !seen.insert(k.as_str()) {
                return Err(KeywordListError::Duplicate(k.clone()));
            }
        }
        Ok(KeywordList {
            name: name.into(),
            keywords,
        })
    }

    /// Like [`KeywordList::new`] but also checks that every keyword is
    /// already in normalized form under `config`.
    pub fn normalized(
        name: impl Into<String>,
        keywords: Vec<String>,
        config: &NormalizationConfig,
    ) -> Result<Self, KeywordListError> {
        for (i, k) in keywords.iter().enumerate() {
            if normalize_keyword(k, config).as_deref() != Some(k.as_str()) {
                return Err(KeywordListError::NotNormalized {
                    line: i + 1,
                    word: k.clone(),
                });
            }
        }
        Self::new(name, keywords)
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    pub fn len(&self) -> usize {
        self.keywords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.keywords.iter().any(|k| k == token)
    }

    /// Reads the plain-text list format: one keyword per line, `#` comments
    /// and blank lines ignored, order preserved.
    pub fn read<R: BufRead>(
        name: impl Into<String>,
        input: R,
        config: &NormalizationConfig,
    ) -> Result<Self, KeywordListError> {
        let mut words = Vec::new();
        let mut seen = HashSet::new();
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| KeywordListError::Io(e.to_string()))?;
            let word = line.trim();
            if word.is_empty() || word.starts_with('#') {
                continue;
            }
            if normalize_keyword(word, config).as_deref() != Some(word) {
                return Err(KeywordListError::NotNormalized {
                    line: n + 1,
                    word: word.to_owned(),
                });
            }
            if !seen.insert(word.to_owned()) {
                return Err(KeywordListError::Duplicate(word.to_owned()));
            }
            words.push(word.to_owned());
        }
        Self::new(name, words)
    }

    pub fn write<W: Write>(&self, mut out: W, header: &[String]) -> std::io::Result<()> {
        for h in header {
            writeln!(out, "# {h}")?;
        }
        for k in &self.keywords {
            writeln!(out, "{k}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateLists {
    pub lists: Vec<KeywordList>,
    pub warnings: Vec<String>,
}

/// Name used for the top-`k` candidate list.
pub fn candidate_name(k: usize) -> String {
    format!("top-{k:03}")
}

/// Takes the top-`k` prefix of `ranked` for every requested size (ascending,
/// deduplicated). Sizes larger than the vocabulary are clamped and a warning
/// is recorded.
pub fn candidate_lists<F>(ranked: &[KeywordScore<F>], sizes: &[usize]) -> CandidateLists {
    let sizes: BTreeSet<usize> = sizes.iter().copied().filter(|&k| k >= 1).collect();
    let mut lists = Vec::with_capacity(sizes.len());
    let mut warnings = Vec::new();
    for k in sizes {
        let take = k.min(ranked.len());
        if take < k {
            warnings.push(format!(
                "requested {k} keywords but the vocabulary has only {}; list clamped",
                ranked.len()
            ));
        }
        let keywords = ranked[..take].iter().map(|s| s.token.clone()).collect();
        lists.push(KeywordList::new(candidate_name(k), keywords).expect("ranked tokens are unique"));
    }
    CandidateLists { lists, warnings }
}
