//! Keyword filtering of transcripts, plus the two numbers that judge a
//! filter: how much text it keeps and how many known messages survive.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::num::NonZeroU64;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codebook::MessageAnnotation;
use crate::corpus::{Corpus, Transcript};
use crate::keyness::KeywordList;
use crate::normalize::{normalize, NormalizationConfig};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FilterError {
    #[error("keyword list {0:?} is empty")]
    EmptyKeywordList(String),
    #[error("annotation {annotation:?} references transcript {transcript:?}, which was not filtered")]
    OrphanAnnotation { annotation: String, transcript: String },
    #[error("gold annotation {0:?} has no token that survives normalization")]
    DegenerateGoldSpan(String),
    #[error("filtered set does not match the corpus: {0}")]
    CorpusMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilteredTranscript {
    pub transcript_id: String,
    /// Matched segments plus their window neighbours.
    pub retained: BTreeSet<usize>,
    /// Matched segments only, with the keywords each one contains.
    pub matches: BTreeMap<usize, BTreeSet<String>>,
}

impl FilteredTranscript {
    pub fn is_retained(&self, index: usize) -> bool {
        self.retained.contains(&index)
    }
}

/// Keeps every segment whose normalized tokens intersect `list`, plus up to
/// `window` neighbours on each side.
pub fn filter_transcript(
    transcript: &Transcript,
    list: &KeywordList,
    window: usize,
    config: &NormalizationConfig,
) -> Result<FilteredTranscript, FilterError> {
    if list.is_empty() {
        return Err(FilterError::EmptyKeywordList(list.name.clone()));
    }
    let keywords: HashSet<&str> = list.keywords().iter().map(String::as_str).collect();
    let mut matches = BTreeMap::new();
    for seg in &transcript.segments {
        let hits: BTreeSet<String> = normalize(&seg.text, config)
            .into_iter()
            .filter(|t| keywords.contains(t.as_str()))
            .collect();
        if !hits.is_empty() {
            matches.insert(seg.index, hits);
        }
    }
    let last = transcript.segments.len().saturating_sub(1);
    let mut retained = BTreeSet::new();
    for &i in matches.keys() {
        retained.extend(i.saturating_sub(window)..=(i + window).min(last));
    }
    Ok(FilteredTranscript {
        transcript_id: transcript.id.clone(),
        retained,
        matches,
    })
}

/// Filters every transcript in corpus order.
pub fn filter_corpus(
    corpus: &Corpus,
    list: &KeywordList,
    window: usize,
    config: &NormalizationConfig,
) -> Result<Vec<FilteredTranscript>, FilterError> {
    corpus
        .transcripts
        .iter()
        .map(|t| filter_transcript(t, list, window, config))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport<S = f64> {
    pub total_tokens: u64,
    pub retained_tokens: u64,
    pub retained_fraction: S,
    pub total_pages: S,
    pub retained_pages: S,
}

/// Token-weighted share of the corpus that survives filtering. Filtered
/// entries for transcripts absent from `corpus` contribute nothing.
pub fn reduction_report<S: Scalar>(
    corpus: &Corpus,
    filtered: &[FilteredTranscript],
    words_per_page: NonZeroU64,
) -> ReductionReport<S> {
    let by_id: HashMap<&str, &FilteredTranscript> =
        filtered.iter().map(|f| (f.transcript_id.as_str(), f)).collect();
    let mut total = 0u64;
    let mut retained = 0u64;
    for t in &corpus.transcripts {
        let kept = by_id.get(t.id.as_str());
        for seg in &t.segments {
            let n = seg.token_count as u64;
            total += n;
            if kept.is_some_and(|f| f.is_retained(seg.index)) {
                retained += n;
            }
        }
    }
    let wpp = words_per_page.get();
    ReductionReport {
        total_tokens: total,
        retained_tokens: retained,
        retained_fraction: S::ratio(retained, total),
        total_pages: S::ratio(total, wpp),
        retained_pages: S::ratio(retained, wpp),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageCoverage<S = f64> {
    pub annotation_id: String,
    pub retained: bool,
    /// Retained span tokens over span tokens. Spans without tokens count as
    /// fully covered when any of their segments is retained.
    pub coverage: S,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecallReport<S = f64> {
    pub gold_total: usize,
    pub gold_retained: usize,
    /// `gold_retained / gold_total`; 1 when there is no gold at all, since
    /// nothing was missed.
    pub recall: S,
    pub missed: Vec<String>,
    pub coverage: Vec<MessageCoverage<S>>,
}

/// A gold message counts as retained when at least one segment of its span
/// survived filtering.
pub fn recall_report<S: Scalar>(
    corpus: &Corpus,
    filtered: &[FilteredTranscript],
    gold: &[MessageAnnotation],
) -> Result<RecallReport<S>, FilterError> {
    let by_id: HashMap<&str, &FilteredTranscript> =
        filtered.iter().map(|f| (f.transcript_id.as_str(), f)).collect();
    let mut retained_count = 0;
    let mut missed = Vec::new();
    let mut coverage = Vec::with_capacity(gold.len());
    for ann in gold {
        let orphan = || FilterError::OrphanAnnotation {
            annotation: ann.id.clone(),
            transcript: ann.transcript_id.clone(),
        };
        let f = by_id.get(ann.transcript_id.as_str()).ok_or_else(orphan)?;
        let t = corpus.transcript(&ann.transcript_id).ok_or_else(orphan)?;
        let mut span_tokens = 0u64;
        let mut kept_tokens = 0u64;
        let mut any = false;
        for i in ann.span.indices() {
            let n = t.segments.get(i).map_or(0, |s| s.token_count as u64);
            span_tokens += n;
            if f.is_retained(i) {
                any = true;
                kept_tokens += n;
            }
        }
        let frac = if span_tokens == 0 {
            if any {
                S::one()
            } else {
                S::zero()
            }
        } else {
            S::ratio(kept_tokens, span_tokens)
        };
        if any {
            retained_count += 1;
        } else {
            missed.push(ann.id.clone());
        }
        coverage.push(MessageCoverage {
            annotation_id: ann.id.clone(),
            retained: any,
            coverage: frac,
        });
    }
    let recall = if gold.is_empty() {
        S::one()
    } else {
        S::ratio(retained_count as u64, gold.len() as u64)
    };
    Ok(RecallReport {
        gold_total: gold.len(),
        gold_retained: retained_count,
        recall,
        missed,
        coverage,
    })
}

/// The list of every token found inside any gold span, in first-seen order.
///
/// Filtering with this list must reach recall 1; a span with no surviving
/// token makes that impossible and is reported as degenerate.
pub fn gold_union_list(
    corpus: &Corpus,
    gold: &[MessageAnnotation],
    config: &NormalizationConfig,
) -> Result<KeywordList, FilterError> {
    let mut seen = HashSet::new();
    let mut words = Vec::new();
    for ann in gold {
        let t = corpus
            .transcript(&ann.transcript_id)
            .ok_or_else(|| FilterError::OrphanAnnotation {
                annotation: ann.id.clone(),
                transcript: ann.transcript_id.clone(),
            })?;
        let mut found = false;
        for i in ann.span.indices() {
            let Some(seg) = t.segments.get(i) else { continue };
            for tok in normalize(&seg.text, config) {
                found = true;
                if seen.insert(tok.clone()) {
                    words.push(tok);
                }
            }
        }
        if !found {
            return Err(FilterError::DegenerateGoldSpan(ann.id.clone()));
        }
    }
    Ok(KeywordList::new("gold-union", words).expect("deduplicated above"))
}

/// The file coders consume: retained segments of each transcript with their
/// original indices and matched keywords, under a provenance header.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilteredSet {
    pub list_name: String,
    pub config_hash: String,
    pub window: usize,
    pub transcripts: Vec<FilteredTranscriptRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilteredTranscriptRecord {
    pub transcript_id: String,
    pub segments: Vec<RetainedSegment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetainedSegment {
    pub index: usize,
    pub id: String,
    pub text: String,
    pub matches: Vec<String>,
}

impl FilteredSet {
    pub fn build(
        corpus: &Corpus,
        filtered: &[FilteredTranscript],
        list_name: &str,
        config_hash: &str,
        window: usize,
    ) -> Result<Self, FilterError> {
        let transcripts = filtered
            .iter()
            .map(|f| {
                let t = corpus
                    .transcript(&f.transcript_id)
                    .ok_or_else(|| FilterError::CorpusMismatch(format!("unknown transcript {:?}", f.transcript_id)))?;
                let segments = f
                    .retained
                    .iter()
                    .map(|&i| {
                        let seg = t.segments.get(i).ok_or_else(|| {
                            FilterError::CorpusMismatch(format!("{}: no segment {i}", t.id))
                        })?;
                        Ok(RetainedSegment {
                            index: i,
                            id: seg.id.clone(),
                            text: seg.text.clone(),
                            matches: f.matches.get(&i).map(|m| m.iter().cloned().collect()).unwrap_or_default(),
                        })
                    })
                    .collect::<Result<_, FilterError>>()?;
                Ok(FilteredTranscriptRecord {
                    transcript_id: f.transcript_id.clone(),
                    segments,
                })
            })
            .collect::<Result<_, FilterError>>()?;
        Ok(FilteredSet {
            list_name: list_name.to_owned(),
            config_hash: config_hash.to_owned(),
            window,
            transcripts,
        })
    }

    pub fn to_filtered(&self) -> Vec<FilteredTranscript> {
        self.transcripts
            .iter()
            .map(|r| FilteredTranscript {
                transcript_id: r.transcript_id.clone(),
                retained: r.segments.iter().map(|s| s.index).collect(),
                matches: r
                    .segments
                    .iter()
                    .filter(|s| !s.matches.is_empty())
                    .map(|s| (s.index, s.matches.iter().cloned().collect()))
                    .collect(),
            })
            .collect()
    }

    pub fn retained_segment_count(&self) -> usize {
        self.transcripts.iter().map(|t| t.segments.len()).sum()
    }

    /// Checks every record against `corpus`: known transcript, valid index,
    /// matching segment id.
    pub fn check_against(&self, corpus: &Corpus) -> Result<(), FilterError> {
        for rec in &self.transcripts {
            let t = corpus
                .transcript(&rec.transcript_id)
                .ok_or_else(|| FilterError::CorpusMismatch(format!("unknown transcript {:?}", rec.transcript_id)))?;
            for s in &rec.segments {
                match t.segments.get(s.index) {
                    Some(seg) if seg.id == s.id => {}
                    _ => {
                        return Err(FilterError::CorpusMismatch(format!(
                            "{}: segment {} ({}) not in corpus",
                            t.id, s.index, s.id
                        )))
                    }
                }
            }
        }
        Ok(())
    }
}
