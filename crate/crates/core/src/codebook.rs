//! The frame × appeal taxonomy and the annotation model built on it.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Transcript;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Gain,
    Loss,
}

impl Frame {
    pub const ALL: [Frame; 2] = [Frame::Gain, Frame::Loss];

    pub fn as_str(self) -> &'static str {
        match self {
            Frame::Gain => "gain",
            Frame::Loss => "loss",
        }
    }
}

/// Motivational incentive, ordered from most external to most internal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Appeal {
    Extrinsic,
    Introjected,
    Identified,
    Intrinsic,
}

impl Appeal {
    pub const ALL: [Appeal; 4] = [
        Appeal::Extrinsic,
        Appeal::Introjected,
        Appeal::Identified,
        Appeal::Intrinsic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Appeal::Extrinsic => "extrinsic",
            Appeal::Introjected => "introjected",
            Appeal::Identified => "identified",
            Appeal::Intrinsic => "intrinsic",
        }
    }
}

impl FromStr for Frame {
    type Err = UnknownLabel;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Frame::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| UnknownLabel(s.to_owned()))
    }
}

impl FromStr for Appeal {
    type Err = UnknownLabel;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Appeal::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| UnknownLabel(s.to_owned()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown codebook label {0:?}")]
pub struct UnknownLabel(pub String);

/// One of the eight message categories.
///
/// The derived ordering is the codebook order used by every export: all gain
/// categories before loss, and within a frame extrinsic, introjected,
/// identified, intrinsic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Category {
    frame: Frame,
    appeal: Appeal,
}

impl Category {
    pub const COUNT: usize = 8;

    pub const fn new(frame: Frame, appeal: Appeal) -> Self {
        Category { frame, appeal }
    }

    pub fn frame(self) -> Frame {
        self.frame
    }

    pub fn appeal(self) -> Appeal {
        self.appeal
    }

    pub fn decompose(self) -> (Frame, Appeal) {
        (self.frame, self.appeal)
    }

    /// All categories in codebook order.
    pub fn all() -> impl Iterator<Item = Category> {
        Frame::ALL
            .into_iter()
            .flat_map(|f| Appeal::ALL.into_iter().map(move |a| Category::new(f, a)))
    }

    /// Zero-based position in codebook order (0..8).
    pub fn ordinal(self) -> usize {
        self.frame as usize * Appeal::ALL.len() + self.appeal as usize
    }

    pub fn from_ordinal(n: usize) -> Option<Category> {
        Category::all().nth(n)
    }

    /// Short label such as `GF-identified`, matching figure legends.
    pub fn short_label(self) -> String {
        let f = match self.frame {
            Frame::Gain => "GF",
            Frame::Loss => "LF",
        };
        format!("{f}-{}", self.appeal.as_str())
    }
}

pub fn category_of(frame: Frame, appeal: Appeal) -> Category {
    Category::new(frame, appeal)
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.frame.as_str(), self.appeal.as_str())
    }
}

impl FromStr for Category {
    type Err = UnknownLabel;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (f, a) = s.split_once('_').ok_or_else(|| UnknownLabel(s.to_owned()))?;
        Ok(Category::new(
            f.parse().map_err(|_| UnknownLabel(s.to_owned()))?,
            a.parse().map_err(|_| UnknownLabel(s.to_owned()))?,
        ))
    }
}

impl From<Category> for String {
    fn from(c: Category) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for Category {
    type Error = UnknownLabel;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// A coder's verdict on a candidate span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "DecisionParts", into = "DecisionParts")]
pub enum Decision {
    Message(Category),
    NotAMessage,
}

impl Decision {
    pub fn category(self) -> Option<Category> {
        match self {
            Decision::Message(c) => Some(c),
            Decision::NotAMessage => None,
        }
    }

    pub fn is_message(self) -> bool {
        matches!(self, Decision::Message(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionKind {
    Message,
    NotAMessage,
}

/// Loosely-typed decision as it arrives over the wire or from a table row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionParts {
    pub kind: DecisionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Frame>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub appeal: Option<Appeal>,
}

impl TryFrom<DecisionParts> for Decision {
    type Error = Violation;
    fn try_from(p: DecisionParts) -> Result<Self, Violation> {
        match (p.kind, p.frame, p.appeal) {
            (DecisionKind::Message, Some(f), Some(a)) => Ok(Decision::Message(Category::new(f, a))),
            (DecisionKind::Message, _, _) => Err(Violation::MissingCategory),
            (DecisionKind::NotAMessage, None, None) => Ok(Decision::NotAMessage),
            (DecisionKind::NotAMessage, _, _) => Err(Violation::UnexpectedCategory),
        }
    }
}

impl From<Decision> for DecisionParts {
    fn from(d: Decision) -> Self {
        match d {
            Decision::Message(c) => DecisionParts {
                kind: DecisionKind::Message,
                frame: Some(c.frame),
                appeal: Some(c.appeal),
            },
            Decision::NotAMessage => DecisionParts {
                kind: DecisionKind::NotAMessage,
                frame: None,
                appeal: None,
            },
        }
    }
}

/// Inclusive range of segment indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn single(index: usize) -> Self {
        Span { start: index, end: index }
    }

    pub fn is_ordered(&self) -> bool {
        self.start <= self.end
    }

    /// Number of segments covered; zero for an inverted span.
    pub fn len(&self) -> usize {
        if self.is_ordered() {
            self.end - self.start + 1
        } else {
            0
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, index: usize) -> bool {
        self.start <= index && index <= self.end
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        self.start..=self.end
    }

    /// Number of segment indices shared with `other`.
    pub fn intersection_len(&self, other: &Span) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        if lo <= hi && self.is_ordered() && other.is_ordered() {
            hi - lo + 1
        } else {
            0
        }
    }

    /// Jaccard similarity of the two index sets.
    pub fn jaccard(&self, other: &Span) -> f64 {
        let inter = self.intersection_len(other);
        let union = self.len() + other.len() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageAnnotation {
    pub id: String,
    pub coder_id: String,
    pub transcript_id: String,
    pub span: Span,
    pub decision: Decision,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Position in the coder log that produced this annotation.
    pub created_at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Error)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum Violation {
    #[error("span [{start},{end}] starts after it ends")]
    InvalidSpan { start: usize, end: usize },
    #[error("span ends at {end} but the transcript has {segment_count} segments")]
    SpanOutOfBounds { end: usize, segment_count: usize },
    #[error("message decision without a frame and appeal")]
    MissingCategory,
    #[error("not-a-message decision carries a category")]
    UnexpectedCategory,
    #[error("field {field} is empty")]
    EmptyField { field: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodebookError {
    #[error("annotation references transcript {annotation:?} but was checked against {transcript:?}")]
    TranscriptMismatch { annotation: String, transcript: String },
}

/// Checks the structural coding rules: a contiguous in-bounds span and
/// non-empty identifiers. Whether the utterance aims to engage students is a
/// coder judgment and is not checked here.
pub fn validate_annotation(
    annotation: &MessageAnnotation,
    transcript: &Transcript,
) -> Result<ValidationReport, CodebookError> {
    if annotation.transcript_id != transcript.id {
        return Err(CodebookError::TranscriptMismatch {
            annotation: annotation.transcript_id.clone(),
            transcript: transcript.id.clone(),
        });
    }
    let mut violations = Vec::new();
    for (field, value) in [("id", &annotation.id), ("coder_id", &annotation.coder_id)] {
        if value.trim().is_empty() {
            violations.push(Violation::EmptyField { field: field.into() });
        }
    }
    let Span { start, end } = annotation.span;
    if start > end {
        violations.push(Violation::InvalidSpan { start, end });
    }
    let n = transcript.segments.len();
    if start.max(end) >= n {
        violations.push(Violation::SpanOutOfBounds {
            end: start.max(end),
            segment_count: n,
        });
    }
    Ok(ValidationReport { violations })
}

/// One line of the tabular annotation export. Columns are fixed in this
/// order: annotation_id, coder_id, transcript_id, start, end, frame, appeal,
/// decision, note.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRow {
    pub annotation_id: String,
    pub coder_id: String,
    pub transcript_id: String,
    pub start: usize,
    pub end: usize,
    pub frame: Option<Frame>,
    pub appeal: Option<Appeal>,
    pub decision: DecisionKind,
    pub note: Option<String>,
}

impl From<&MessageAnnotation> for AnnotationRow {
    fn from(a: &MessageAnnotation) -> Self {
        let parts = DecisionParts::from(a.decision);
        AnnotationRow {
            annotation_id: a.id.clone(),
            coder_id: a.coder_id.clone(),
            transcript_id: a.transcript_id.clone(),
            start: a.span.start,
            end: a.span.end,
            frame: parts.frame,
            appeal: parts.appeal,
            decision: parts.kind,
            note: a.note.clone(),
        }
    }
}

impl AnnotationRow {
    pub fn into_annotation(self, created_at: u64) -> Result<MessageAnnotation, Violation> {
        let decision = Decision::try_from(DecisionParts {
            kind: self.decision,
            frame: self.frame,
            appeal: self.appeal,
        })?;
        Ok(MessageAnnotation {
            id: self.annotation_id,
            coder_id: self.coder_id,
            transcript_id: self.transcript_id,
            span: Span::new(self.start, self.end),
            decision,
            note: self.note.filter(|n| !n.is_empty()),
            created_at,
        })
    }
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("row {row}: {violation}")]
    Row { row: usize, violation: Violation },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub fn write_annotations_csv<W: Write>(annotations: &[MessageAnnotation], out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for a in annotations {
        w.serialize(AnnotationRow::from(a))?;
    }
    // An empty table still gets its header line.
    if annotations.is_empty() {
        w.write_record([
            "annotation_id",
            "coder_id",
            "transcript_id",
            "start",
            "end",
            "frame",
            "appeal",
            "decision",
            "note",
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a tabular annotation export. `created_at` is the 0-based row number.
pub fn read_annotations_csv<R: Read>(input: R) -> Result<Vec<MessageAnnotation>, TableError> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let mut out = Vec::new();
    for (row, rec) in r.deserialize::<AnnotationRow>().enumerate() {
        let ann = rec?
            .into_annotation(row as u64)
            .map_err(|violation| TableError::Row { row: row + 1, violation })?;
        out.push(ann);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Grade, Segment, Trimester};
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn transcript(n: usize) -> Transcript {
        Transcript {
            id: "t1".into(),
            teacher_id: "teacher".into(),
            group_id: "g".into(),
            grade: Grade::new(9).unwrap(),
            trimester: Trimester::new(1).unwrap(),
            academic_year: "2021-22".into(),
            segments: (0..n)
                .map(|i| Segment {
                    id: format!("s{i}"),
                    index: i,
                    text: "texto".into(),
                    token_count: 1,
                    silence: false,
                    start_ms: None,
                    end_ms: None,
                })
                .collect(),
        }
    }

    fn annotation(span: Span, decision: Decision) -> MessageAnnotation {
        MessageAnnotation {
            id: "a1".into(),
            coder_id: "coder-a".into(),
            transcript_id: "t1".into(),
            span,
            decision,
            note: None,
            created_at: 0,
        }
    }

    #[test]
    fn constructor_identity_and_roundtrip() {
        let c = category_of(Frame::Gain, Appeal::Extrinsic);
        assert_eq!(c.to_string(), "gain_extrinsic");
        assert_eq!(
            category_of(Frame::Loss, Appeal::Identified).decompose(),
            (Frame::Loss, Appeal::Identified)
        );
    }

    #[test]
    fn eight_distinct_categories_in_codebook_order() {
        let all: Vec<_> = Category::all().collect();
        assert_eq!(all.len(), Frame::ALL.len() * Appeal::ALL.len());
        assert_eq!(all.len(), Category::COUNT);
        assert_eq!(all.iter().collect::<HashSet<_>>().len(), 8);
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
        assert_eq!(all[2], category_of(Frame::Gain, Appeal::Identified));
        assert_eq!(all[4], category_of(Frame::Loss, Appeal::Extrinsic));
        for (i, c) in all.iter().enumerate() {
            assert_eq!(c.ordinal(), i);
            assert_eq!(Category::from_ordinal(i), Some(*c));
            assert_eq!(c.to_string().parse::<Category>(), Ok(*c));
        }
    }

    #[test]
    fn valid_span_is_accepted() {
        let a = annotation(
            Span::new(3, 5),
            Decision::Message(category_of(Frame::Gain, Appeal::Identified)),
        );
        assert!(validate_annotation(&a, &transcript(10)).unwrap().is_valid());
    }

    #[test]
    fn inverted_span_is_a_violation() {
        let a = annotation(Span::new(5, 3), Decision::NotAMessage);
        let report = validate_annotation(&a, &transcript(10)).unwrap();
        assert_eq!(report.violations, [Violation::InvalidSpan { start: 5, end: 3 }]);
    }

    #[test]
    fn out_of_bounds_span() {
        let a = annotation(Span::new(8, 10), Decision::NotAMessage);
        let report = validate_annotation(&a, &transcript(10)).unwrap();
        assert_eq!(
            report.violations,
            [Violation::SpanOutOfBounds { end: 10, segment_count: 10 }]
        );
    }

    #[test]
    fn transcript_mismatch() {
        let mut a = annotation(Span::single(0), Decision::NotAMessage);
        a.transcript_id = "other".into();
        assert!(matches!(
            validate_annotation(&a, &transcript(3)),
            Err(CodebookError::TranscriptMismatch { .. })
        ));
    }

    #[test]
    fn missing_category_from_wire() {
        let json = r#"{"id":"a","coder_id":"c","transcript_id":"t1","span":{"start":0,"end":0},
                       "decision":{"kind":"message","frame":"gain"},"created_at":0}"#;
        let err = serde_json::from_str::<MessageAnnotation>(json).unwrap_err();
        assert!(err.to_string().contains("frame and appeal"));

        let row = AnnotationRow {
            annotation_id: "a".into(),
            coder_id: "c".into(),
            transcript_id: "t1".into(),
            start: 0,
            end: 0,
            frame: None,
            appeal: Some(Appeal::Intrinsic),
            decision: DecisionKind::Message,
            note: None,
        };
        assert_eq!(row.into_annotation(0), Err(Violation::MissingCategory));
    }

    #[test]
    fn jaccard_of_overlapping_spans() {
        assert_eq!(Span::new(2, 4).jaccard(&Span::new(3, 5)), 0.5);
        assert_eq!(Span::new(2, 4).jaccard(&Span::new(5, 6)), 0.0);
        assert_eq!(Span::new(1, 1).jaccard(&Span::new(1, 1)), 1.0);
    }

    #[test]
    fn csv_table_roundtrip_keeps_column_order() {
        let anns = vec![
            annotation(Span::new(1, 2), Decision::Message(category_of(Frame::Loss, Appeal::Introjected))),
            MessageAnnotation {
                id: "a2".into(),
                note: Some("context, with comma".into()),
                created_at: 1,
                ..annotation(Span::single(4), Decision::NotAMessage)
            },
        ];
        let mut buf = Vec::new();
        write_annotations_csv(&anns, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("annotation_id,coder_id,transcript_id,start,end,frame,appeal,decision,note\n"));
        assert!(text.contains("a1,coder-a,t1,1,2,loss,introjected,message,\n"));
        assert_eq!(read_annotations_csv(buf.as_slice()).unwrap(), anns);

        let mut empty = Vec::new();
        write_annotations_csv(&[], &mut empty).unwrap();
        assert!(read_annotations_csv(empty.as_slice()).unwrap().is_empty());
    }

    fn any_decision() -> impl Strategy<Value = Decision> {
        prop_oneof![
            Just(Decision::NotAMessage),
            (0usize..8).prop_map(|i| Decision::Message(Category::from_ordinal(i).unwrap())),
        ]
    }

    proptest! {
        #[test]
        fn accepted_annotations_roundtrip_json(start in 0usize..10, len in 0usize..4, decision in any_decision(),
                                               note in proptest::option::of("[a-z ]{1,12}")) {
            let mut a = annotation(Span::new(start, start + len), decision);
            a.note = note;
            let t = transcript(20);
            let report = validate_annotation(&a, &t).unwrap();
            prop_assert!(report.is_valid());
            prop_assert_eq!(validate_annotation(&a, &t).unwrap(), report);
            let back: MessageAnnotation = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
