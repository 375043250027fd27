//! Inter-coder reliability as percent agreement.
//!
//! Two coders' annotations are first aligned: within each transcript, span
//! pairs are matched greedily by descending Jaccard overlap of their segment
//! index sets, keeping only pairs at or above a threshold. A matched pair
//! agrees when both decisions are equal. Every unmatched annotation is a
//! disagreement unit, since finding the message is part of the coding task.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codebook::{Appeal, Category, Decision, Frame, MessageAnnotation};
use crate::scalar::Scalar;

pub const DEFAULT_OVERLAP_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum ReliabilityError {
    #[error("annotation sets come from different corpora ({a:?} vs {b:?})")]
    CorpusMismatch { a: String, b: String },
    #[error("overlap threshold {0} is outside (0, 1]")]
    InvalidThreshold(f64),
    #[error("no coding units to compare")]
    NoUnits,
}

/// One coder's annotations over a named corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationSet {
    pub corpus_id: String,
    pub annotations: Vec<MessageAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub a: MessageAnnotation,
    pub b: MessageAnnotation,
    pub overlap: f64,
}

impl MatchedPair {
    pub fn agrees(&self) -> bool {
        self.a.decision == self.b.decision
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AlignedPairs {
    pub matched: Vec<MatchedPair>,
    pub unmatched_a: Vec<MessageAnnotation>,
    pub unmatched_b: Vec<MessageAnnotation>,
}

impl AlignedPairs {
    /// The same alignment seen from the other coder's side.
    pub fn mirrored(&self) -> AlignedPairs {
        AlignedPairs {
            matched: self
                .matched
                .iter()
                .map(|p| MatchedPair {
                    a: p.b.clone(),
                    b: p.a.clone(),
                    overlap: p.overlap,
                })
                .collect(),
            unmatched_a: self.unmatched_b.clone(),
            unmatched_b: self.unmatched_a.clone(),
        }
    }

    pub fn units(&self) -> AgreementUnits {
        let agreeing = self.matched.iter().filter(|p| p.agrees()).count();
        AgreementUnits {
            agreeing,
            disagreeing: self.matched.len() - agreeing,
            unmatched_a: self.unmatched_a.len(),
            unmatched_b: self.unmatched_b.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementUnits {
    pub agreeing: usize,
    pub disagreeing: usize,
    pub unmatched_a: usize,
    pub unmatched_b: usize,
}

impl AgreementUnits {
    pub fn total(&self) -> usize {
        self.agreeing + self.disagreeing + self.unmatched_a + self.unmatched_b
    }
}

fn pair_key<'x>(
    x: &'x MessageAnnotation,
    y: &'x MessageAnnotation,
) -> (usize, usize, &'x str, &'x str) {
    let (s_lo, s_hi) = if x.span.start <= y.span.start {
        (x.span.start, y.span.start)
    } else {
        (y.span.start, x.span.start)
    };
    let (i_lo, i_hi) = if x.id <= y.id {
        (x.id.as_str(), y.id.as_str())
    } else {
        (y.id.as_str(), x.id.as_str())
    };
    (s_lo, s_hi, i_lo, i_hi)
}

/// Greedy one-to-one alignment. Candidate pairs share a transcript and have
/// Jaccard overlap ≥ `threshold`; they are taken in order of descending
/// overlap, then earlier span start, then annotation id. The tie-break key
/// is symmetric in the two coders, so swapping `a` and `b` mirrors the result.
pub fn align_annotations(
    a: &AnnotationSet,
    b: &AnnotationSet,
    threshold: f64,
) -> Result<AlignedPairs, ReliabilityError> {
    if a.corpus_id != b.corpus_id {
        return Err(ReliabilityError::CorpusMismatch {
            a: a.corpus_id.clone(),
            b: b.corpus_id.clone(),
        });
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(ReliabilityError::InvalidThreshold(threshold));
    }
    let (xs, ys) = (&a.annotations, &b.annotations);

    let mut candidates: Vec<(usize, usize, f64)> = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in ys.iter().enumerate() {
            if x.transcript_id != y.transcript_id {
                continue;
            }
            let overlap = x.span.jaccard(&y.span);
            if overlap >= threshold {
                candidates.push((i, j, overlap));
            }
        }
    }
    candidates.sort_by(|&(i1, j1, o1), &(i2, j2, o2)| {
        o2.partial_cmp(&o1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| xs[i1].transcript_id.cmp(&xs[i2].transcript_id))
            .then_with(|| pair_key(&xs[i1], &ys[j1]).cmp(&pair_key(&xs[i2], &ys[j2])))
    });

    let mut used_a = HashSet::new();
    let mut used_b = HashSet::new();
    let mut matched = Vec::new();
    for (i, j, overlap) in candidates {
        if used_a.contains(&i) || used_b.contains(&j) {
            continue;
        }
        used_a.insert(i);
        used_b.insert(j);
        matched.push(MatchedPair {
            a: xs[i].clone(),
            b: ys[j].clone(),
            overlap,
        });
    }
    matched.sort_by(|p, q| {
        (&p.a.transcript_id, pair_key(&p.a, &p.b)).cmp(&(&q.a.transcript_id, pair_key(&q.a, &q.b)))
    });
    let leftover = |set: &[MessageAnnotation], used: &HashSet<usize>| {
        set.iter()
            .enumerate()
            .filter(|(k, _)| !used.contains(k))
            .map(|(_, x)| x.clone())
            .collect::<Vec<_>>()
    };
    Ok(AlignedPairs {
        unmatched_a: leftover(xs, &used_a),
        unmatched_b: leftover(ys, &used_b),
        matched,
    })
}

/// `100 × agreeing / (agreeing + disagreeing + unmatched_a + unmatched_b)`.
pub fn percent_agreement<S: Scalar>(pairs: &AlignedPairs) -> Result<S, ReliabilityError> {
    let u = pairs.units();
    if u.total() == 0 {
        return Err(ReliabilityError::NoUnits);
    }
    Ok(S::percent(u.agreeing as u64, u.total() as u64))
}

/// Occurrence agreement restricted to units where `involves` holds for at
/// least one side: `A / (A + D)`, with `A` the matched pairs where both sides
/// satisfy it and `D` every unit where exactly one side does (unmatched
/// annotations count as one-sided). `None` when no unit is involved.
pub fn agreement_where<S: Scalar>(pairs: &AlignedPairs, involves: impl Fn(Decision) -> bool) -> Option<S> {
    let mut both = 0u64;
    let mut one_sided = 0u64;
    for p in &pairs.matched {
        match (involves(p.a.decision), involves(p.b.decision)) {
            (true, true) => both += 1,
            (true, false) | (false, true) => one_sided += 1,
            (false, false) => {}
        }
    }
    one_sided += pairs
        .unmatched_a
        .iter()
        .chain(&pairs.unmatched_b)
        .filter(|x| involves(x.decision))
        .count() as u64;
    if both + one_sided == 0 {
        None
    } else {
        Some(S::percent(both, both + one_sided))
    }
}

pub fn category_agreement<S: Scalar>(pairs: &AlignedPairs, category: Category) -> Option<S> {
    agreement_where(pairs, |d| d.category() == Some(category))
}

/// Agreement on one appeal regardless of frame.
pub fn appeal_agreement<S: Scalar>(pairs: &AlignedPairs, appeal: Appeal) -> Option<S> {
    agreement_where(pairs, |d| d.category().map(Category::appeal) == Some(appeal))
}

/// Agreement on one frame regardless of appeal.
pub fn frame_agreement<S: Scalar>(pairs: &AlignedPairs, frame: Frame) -> Option<S> {
    agreement_where(pairs, |d| d.category().map(Category::frame) == Some(frame))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport<S = f64> {
    pub overall_percent: S,
    pub per_category: BTreeMap<Category, Option<S>>,
    pub per_appeal: BTreeMap<Appeal, Option<S>>,
    pub per_frame: BTreeMap<Frame, Option<S>>,
    pub units: AgreementUnits,
}

pub fn agreement_report<S: Scalar>(pairs: &AlignedPairs) -> Result<AgreementReport<S>, ReliabilityError> {
    Ok(AgreementReport {
        overall_percent: percent_agreement(pairs)?,
        per_category: Category::all().map(|c| (c, category_agreement(pairs, c))).collect(),
        per_appeal: Appeal::ALL.into_iter().map(|a| (a, appeal_agreement(pairs, a))).collect(),
        per_frame: Frame::ALL.into_iter().map(|f| (f, frame_agreement(pairs, f))).collect(),
        units: pairs.units(),
    })
}

/// Transcripts touched by either side, handy for per-transcript partitions.
pub fn transcripts_in(pairs: &AlignedPairs) -> BTreeSet<&str> {
    pairs
        .matched
        .iter()
        .flat_map(|p| [p.a.transcript_id.as_str(), p.b.transcript_id.as_str()])
        .chain(pairs.unmatched_a.iter().map(|x| x.transcript_id.as_str()))
        .chain(pairs.unmatched_b.iter().map(|x| x.transcript_id.as_str()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{category_of, Span};
    use crate::Rational;

    fn ann(id: &str, coder: &str, span: Span, decision: Decision) -> MessageAnnotation {
        MessageAnnotation {
            id: id.into(),
            coder_id: coder.into(),
            transcript_id: "t".into(),
            span,
            decision,
            note: None,
            created_at: 0,
        }
    }

    fn set(anns: Vec<MessageAnnotation>) -> AnnotationSet {
        AnnotationSet {
            corpus_id: "c".into(),
            annotations: anns,
        }
    }

    fn msg(f: Frame, a: Appeal) -> Decision {
        Decision::Message(category_of(f, a))
    }

    #[test]
    fn identical_sets_align_fully() {
        let xs: Vec<_> = (0..5)
            .map(|i| ann(&format!("x{i}"), "a", Span::new(i * 3, i * 3 + 1), msg(Frame::Gain, Appeal::Identified)))
            .collect();
        let p = align_annotations(&set(xs.clone()), &set(xs), 0.5).unwrap();
        assert_eq!(p.matched.len(), 5);
        assert!(p.matched.iter().all(|m| m.overlap == 1.0));
        assert_eq!(percent_agreement::<f64>(&p).unwrap(), 100.0);
    }

    #[test]
    fn disjoint_spans_do_not_align() {
        let a = set(vec![ann("x", "a", Span::new(0, 1), Decision::NotAMessage)]);
        let b = set(vec![ann("y", "b", Span::new(5, 6), Decision::NotAMessage)]);
        let p = align_annotations(&a, &b, 0.5).unwrap();
        assert!(p.matched.is_empty());
        assert_eq!((p.unmatched_a.len(), p.unmatched_b.len()), (1, 1));
        assert_eq!(percent_agreement::<f64>(&p).unwrap(), 0.0);
    }

    #[test]
    fn half_overlap_meets_threshold() {
        let a = set(vec![ann("x", "a", Span::new(2, 4), Decision::NotAMessage)]);
        let b = set(vec![ann("y", "b", Span::new(3, 5), Decision::NotAMessage)]);
        let p = align_annotations(&a, &b, 0.5).unwrap();
        assert_eq!(p.matched.len(), 1);
        assert_eq!(p.matched[0].overlap, 0.5);
        assert!(align_annotations(&a, &b, 0.51).unwrap().matched.is_empty());
    }

    #[test]
    fn one_in_a_hundred() {
        let xs: Vec<_> = (0..100)
            .map(|i| ann(&format!("x{i}"), "a", Span::single(i), msg(Frame::Gain, Appeal::Extrinsic)))
            .collect();
        let mut ys = xs.clone();
        ys[17].decision = msg(Frame::Loss, Appeal::Extrinsic);
        let p = align_annotations(&set(xs), &set(ys), 0.5).unwrap();
        assert_eq!(percent_agreement::<f64>(&p).unwrap(), 99.0);
        assert_eq!(percent_agreement::<Rational>(&p).unwrap(), Rational::from_integer(99));
    }

    #[test]
    fn category_occurrence_agreement() {
        let c = category_of(Frame::Gain, Appeal::Intrinsic);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..3 {
            xs.push(ann(&format!("x{i}"), "a", Span::single(i), Decision::Message(c)));
            ys.push(ann(&format!("y{i}"), "b", Span::single(i), Decision::Message(c)));
        }
        xs.push(ann("x3", "a", Span::single(3), Decision::Message(c)));
        ys.push(ann("y3", "b", Span::single(3), Decision::NotAMessage));
        let p = align_annotations(&set(xs), &set(ys), 0.5).unwrap();
        assert_eq!(category_agreement::<f64>(&p, c), Some(75.0));
        assert_eq!(category_agreement::<f64>(&p, category_of(Frame::Loss, Appeal::Intrinsic)), None);
        assert_eq!(appeal_agreement::<f64>(&p, Appeal::Intrinsic), Some(75.0));
    }

    #[test]
    fn unmatched_labelled_annotation_is_one_sided() {
        let c = category_of(Frame::Loss, Appeal::Identified);
        let a = set(vec![ann("x", "a", Span::single(0), Decision::Message(c))]);
        let b = set(vec![]);
        let p = align_annotations(&a, &b, 0.5).unwrap();
        assert_eq!(category_agreement::<f64>(&p, c), Some(0.0));
    }

    #[test]
    fn errors() {
        let a = set(vec![]);
        let mut b = set(vec![]);
        assert_eq!(
            percent_agreement::<f64>(&align_annotations(&a, &b, 0.5).unwrap()),
            Err(ReliabilityError::NoUnits)
        );
        assert_eq!(align_annotations(&a, &b, 0.0), Err(ReliabilityError::InvalidThreshold(0.0)));
        b.corpus_id = "other".into();
        assert!(matches!(
            align_annotations(&a, &b, 0.5),
            Err(ReliabilityError::CorpusMismatch { .. })
        ));
    }

    #[test]
    fn greedy_prefers_larger_overlap() {
        // x overlaps y1 fully and y2 partially; y2 should stay unmatched.
        let a = set(vec![ann("x", "a", Span::new(0, 1), Decision::NotAMessage)]);
        let b = set(vec![
            ann("y2", "b", Span::new(1, 2), Decision::NotAMessage),
            ann("y1", "b", Span::new(0, 1), Decision::NotAMessage),
        ]);
        let p = align_annotations(&a, &b, 0.3).unwrap();
        assert_eq!(p.matched[0].b.id, "y1");
        assert_eq!(p.unmatched_b[0].id, "y2");
    }

    #[test]
    fn report_serializes_with_string_keys() {
        let a = set(vec![ann("x", "a", Span::single(0), msg(Frame::Gain, Appeal::Intrinsic))]);
        let p = align_annotations(&a, &a.clone(), 0.5).unwrap();
        let r: AgreementReport = agreement_report(&p).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["per_category"]["gain_intrinsic"], 100.0);
        assert!(json["per_category"]["loss_extrinsic"].is_null());
        assert_eq!(json["per_appeal"]["intrinsic"], 100.0);
        let back: AgreementReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, r);
        assert_eq!(transcripts_in(&p).len(), 1);
    }
}
