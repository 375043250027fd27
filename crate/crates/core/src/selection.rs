//! Evaluating candidate keyword lists and picking one.
//!
//! Selection is lexicographic: a list must reach the recall threshold, and
//! among those that do, the one keeping the least text wins. Ties go to the
//! shorter list, then to the alphabetically first name.

use std::cmp::Ordering;
use std::io::{BufRead, Write};
use std::num::NonZeroU64;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codebook::MessageAnnotation;
use crate::corpus::{Corpus, DEFAULT_WORDS_PER_PAGE};
use crate::filtering::{filter_corpus, recall_report, reduction_report};
use crate::keyness::KeywordList;
use crate::normalize::NormalizationConfig;
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum SelectionError {
    #[error("no candidate lists to evaluate")]
    NoCandidates,
    #[error("evaluation table is empty")]
    EmptyTable,
    #[error("no list reaches recall {threshold}")]
    NoFeasibleList { threshold: f64 },
    #[error("recall threshold {0} is outside (0, 1]")]
    InvalidThreshold(f64),
    #[error("malformed evaluation table: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow<S = f64> {
    pub list: String,
    pub size: usize,
    pub recall: S,
    pub retained_fraction: S,
    pub missed_count: usize,
    /// Ids of missed gold messages; empty when the row was read back from a
    /// tabular export, which keeps only the count.
    #[serde(default)]
    pub missed: Vec<String>,
    /// Set when filtering or scoring this candidate failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl<S> EvaluationRow<S> {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationTable<S = f64> {
    pub rows: Vec<EvaluationRow<S>>,
}

fn row_order<S: Scalar>(a: &EvaluationRow<S>, b: &EvaluationRow<S>) -> Ordering {
    a.failed()
        .cmp(&b.failed())
        .then_with(|| {
            a.retained_fraction
                .partial_cmp(&b.retained_fraction)
                .unwrap_or(Ordering::Equal)
        })
        .then_with(|| a.size.cmp(&b.size))
        .then_with(|| a.list.cmp(&b.list))
}

/// Filters the corpus with each candidate and measures recall against `gold`
/// and the retained token fraction. Rows come back sorted by retained
/// fraction, failed rows last.
pub fn evaluate_lists<S: Scalar>(
    corpus: &Corpus,
    gold: &[MessageAnnotation],
    candidates: &[KeywordList],
    window: usize,
    config: &NormalizationConfig,
) -> Result<EvaluationTable<S>, SelectionError> {
    if candidates.is_empty() {
        return Err(SelectionError::NoCandidates);
    }
    let wpp = NonZeroU64::new(DEFAULT_WORDS_PER_PAGE).expect("nonzero");
    let mut rows: Vec<EvaluationRow<S>> = candidates
        .iter()
        .map(|list| {
            let outcome = filter_corpus(corpus, list, window, config).and_then(|filtered| {
                let recall = recall_report::<S>(corpus, &filtered, gold)?;
                let reduction = reduction_report::<S>(corpus, &filtered, wpp);
                Ok((recall, reduction))
            });
            match outcome {
                Ok((recall, reduction)) => EvaluationRow {
                    list: list.name.clone(),
                    size: list.len(),
                    recall: recall.recall,
                    retained_fraction: reduction.retained_fraction,
                    missed_count: recall.missed.len(),
                    missed: recall.missed,
                    error: None,
                },
                Err(e) => EvaluationRow {
                    list: list.name.clone(),
                    size: list.len(),
                    recall: S::zero(),
                    retained_fraction: S::zero(),
                    missed_count: 0,
                    missed: Vec::new(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    rows.sort_by(row_order);
    Ok(EvaluationTable { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionPolicy {
    pub recall_threshold: f64,
}

impl Default for SelectionPolicy {
    fn default() -> Self {
        SelectionPolicy { recall_threshold: 1.0 }
    }
}

impl SelectionPolicy {
    pub fn validate(&self) -> Result<(), SelectionError> {
        if self.recall_threshold > 0.0 && self.recall_threshold <= 1.0 {
            Ok(())
        } else {
            Err(SelectionError::InvalidThreshold(self.recall_threshold))
        }
    }
}

/// The chosen list together with the row that justified it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection<S = f64> {
    pub list: String,
    pub size: usize,
    pub policy: SelectionPolicy,
    pub feasible_rows: usize,
    pub row: EvaluationRow<S>,
}

pub fn select_list<S: Scalar>(
    table: &EvaluationTable<S>,
    policy: &SelectionPolicy,
) -> Result<Selection<S>, SelectionError> {
    policy.validate()?;
    if table.rows.is_empty() {
        return Err(SelectionError::EmptyTable);
    }
    let threshold = S::from_f64(policy.recall_threshold)
        .ok_or(SelectionError::InvalidThreshold(policy.recall_threshold))?;
    let feasible: Vec<&EvaluationRow<S>> = table
        .rows
        .iter()
        .filter(|r| !r.failed() && r.recall >= threshold)
        .collect();
    let best = feasible
        .iter()
        .copied()
        .min_by(|a, b| row_order(a, b))
        .ok_or(SelectionError::NoFeasibleList {
            threshold: policy.recall_threshold,
        })?;
    Ok(Selection {
        list: best.list.clone(),
        size: best.size,
        policy: *policy,
        feasible_rows: feasible.len(),
        row: best.clone(),
    })
}

const SELECTION_PREFIX: &str = "# selection: ";
const HASH_PREFIX: &str = "# config_hash: ";

/// Writes the evaluation table as CSV with columns
/// `list,size,recall,retained_fraction,missed_count`. Failed rows become
/// `# failed:` comment lines; a selection, when given, is appended as a JSON
/// footer line.
pub fn write_evaluation_csv<S: Scalar, W: Write>(
    table: &EvaluationTable<S>,
    config_hash: &str,
    selection: Option<&Selection<S>>,
    mut out: W,
) -> std::io::Result<()>
where
    S: Serialize,
{
    writeln!(out, "{HASH_PREFIX}{config_hash}")?;
    writeln!(out, "list,size,recall,retained_fraction,missed_count")?;
    for r in table.rows.iter().filter(|r| !r.failed()) {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.list,
            r.size,
            r.recall.to_f64_lossy(),
            r.retained_fraction.to_f64_lossy(),
            r.missed_count
        )?;
    }
    for r in table.rows.iter().filter(|r| r.failed()) {
        writeln!(out, "# failed: {}: {}", r.list, r.error.as_deref().unwrap_or(""))?;
    }
    if let Some(sel) = selection {
        let json = serde_json::to_string(sel).map_err(std::io::Error::other)?;
        writeln!(out, "{SELECTION_PREFIX}{json}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationFile {
    pub config_hash: Option<String>,
    pub table: EvaluationTable<f64>,
    pub selection: Option<Selection<f64>>,
}

#[derive(Deserialize)]
struct CsvRow {
    list: String,
    size: usize,
    recall: f64,
    retained_fraction: f64,
    missed_count: usize,
}

pub fn read_evaluation_csv<R: BufRead>(input: R) -> Result<EvaluationFile, SelectionError> {
    let mut body = String::new();
    let mut config_hash = None;
    let mut selection = None;
    let mut failed = Vec::new();
    for line in input.lines() {
        let line = line.map_err(|e| SelectionError::Malformed(e.to_string()))?;
        if let Some(h) = line.strip_prefix(HASH_PREFIX) {
            config_hash = Some(h.trim().to_owned());
        } else if let Some(json) = line.strip_prefix(SELECTION_PREFIX) {
            selection = Some(serde_json::from_str(json).map_err(|e| SelectionError::Malformed(e.to_string()))?);
        } else if let Some(rest) = line.strip_prefix("# failed: ") {
            let (name, err) = rest.split_once(": ").unwrap_or((rest, ""));
            failed.push(EvaluationRow {
                list: name.to_owned(),
                size: 0,
                recall: 0.0,
                retained_fraction: 0.0,
                missed_count: 0,
                missed: Vec::new(),
                error: Some(err.to_owned()),
            });
        } else if !line.starts_with('#') {
            body.push_str(&line);
            body.push('\n');
        }
    }
    let mut rows = Vec::new();
    for rec in csv::Reader::from_reader(body.as_bytes()).deserialize::<CsvRow>() {
        let r = rec.map_err(|e| SelectionError::Malformed(e.to_string()))?;
        if !(0.0..=1.0).contains(&r.recall) || !(0.0..=1.0).contains(&r.retained_fraction) {
            return Err(SelectionError::Malformed(format!("{}: value outside [0, 1]", r.list)));
        }
        rows.push(EvaluationRow {
            list: r.list,
            size: r.size,
            recall: r.recall,
            retained_fraction: r.retained_fraction,
            missed_count: r.missed_count,
            missed: Vec::new(),
            error: None,
        });
    }
    rows.extend(failed);
    Ok(EvaluationFile {
        config_hash,
        table: EvaluationTable { rows },
        selection,
    })
}
