//! Transcript ingestion and corpus-level statistics.
//!
//! A transcript file is JSON Lines, one segment per line:
//!
//! ```text
//! {"id":"s0","index":0,"text":"Mañana hay examen."}
//! {"id":"s1","index":1,"text":"","silence":true}
//! ```
//!
//! `index` must equal the record's position among non-blank lines. Optional
//! `start_ms`/`end_ms` are carried through but never used by any algorithm.
//! A corpus manifest is a JSON document listing transcript files with their
//! metadata plus the grade → group-count registry (see [`Manifest`]).

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::num::NonZeroU64;
use std::ops::Add;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalize::{token_count, NormalizationConfig};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("transcript {0:?} has no segments")]
    EmptyTranscript(String),
    #[error("transcript {transcript:?}: duplicate segment id {id:?} at line {line}")]
    DuplicateSegmentId {
        transcript: String,
        id: String,
        line: usize,
    },
    #[error("grade {0} is outside 9..=12")]
    InvalidGrade(u8),
    #[error("trimester {0} is outside 1..=3")]
    InvalidTrimester(u8),
    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("transcript metadata is missing {0}")]
    MissingMetadata(&'static str),
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("transcript {transcript:?} has grade {grade} which is absent from the group registry")]
    RegistryGap { transcript: String, grade: Grade },
    #[error("group registry lists zero groups for grade {0}")]
    ZeroGroups(Grade),
    #[error("duplicate transcript id {0:?}")]
    DuplicateTranscriptId(String),
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// School grade, restricted to the secondary levels 9 through 12.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "GradeRepr", into = "u8")]
pub struct Grade(u8);

/// JSON object keys are strings, and buffered formats (tagged enums) do not
/// convert them back, so grades accept `"9"` as well as `9`.
#[derive(Deserialize)]
#[serde(untagged)]
enum GradeRepr {
    Number(u8),
    Text(String),
}

impl TryFrom<GradeRepr> for Grade {
    type Error = String;
    fn try_from(repr: GradeRepr) -> Result<Self, String> {
        let value = match repr {
            GradeRepr::Number(n) => n,
            GradeRepr::Text(s) => s.parse().map_err(|_| format!("grade {s:?} is not a number"))?,
        };
        Grade::new(value).map_err(|e| e.to_string())
    }
}

impl Grade {
    pub const ALL: [Grade; 4] = [Grade(9), Grade(10), Grade(11), Grade(12)];

    pub fn new(value: u8) -> Result<Self, CorpusError> {
        if (9..=12).contains(&value) {
            Ok(Grade(value))
        } else {
            Err(CorpusError::InvalidGrade(value))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for Grade {
    type Error = CorpusError;
    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Grade::new(value)
    }
}

impl From<Grade> for u8 {
    fn from(g: Grade) -> u8 {
        g.0
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Term of the academic year, 1 through 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Trimester(u8);

impl Trimester {
    pub const ALL: [Trimester; 3] = [Trimester(1), Trimester(2), Trimester(3)];

    pub fn new(value: u8) -> Result<Self, CorpusError> {
        if (1..=3).contains(&value) {
            Ok(Trimester(value))
        } else {
            Err(CorpusError::InvalidTrimester(value))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for Trimester {
    type Error = CorpusError;
    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Trimester::new(value)
    }
}

impl From<Trimester> for u8 {
    fn from(t: Trimester) -> u8 {
        t.0
    }
}

impl fmt::Display for Trimester {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Number of participating groups per grade.
pub type GroupRegistry = BTreeMap<Grade, u32>;

/// Registry matching the study design: 41, 30, 18 and 37 groups in grades 9-12.
pub fn default_group_registry() -> GroupRegistry {
    [(9, 41), (10, 30), (11, 18), (12, 37)]
        .into_iter()
        .map(|(g, n)| (Grade(g), n))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub id: String,
    pub index: usize,
    pub text: String,
    pub token_count: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub silence: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub id: String,
    pub teacher_id: String,
    pub group_id: String,
    pub grade: Grade,
    pub trimester: Trimester,
    pub academic_year: String,
    pub segments: Vec<Segment>,
}

impl Transcript {
    pub fn token_count(&self) -> u64 {
        self.segments.iter().map(|s| s.token_count as u64).sum()
    }

    pub fn meta(&self) -> TranscriptMeta {
        TranscriptMeta {
            id: self.id.clone(),
            teacher_id: self.teacher_id.clone(),
            group_id: self.group_id.clone(),
            grade: self.grade.get(),
            trimester: self.trimester.get(),
            academic_year: self.academic_year.clone(),
        }
    }

    /// Checks the structural invariants that ingestion guarantees. Useful for
    /// transcripts that arrive as whole documents rather than through
    /// [`ingest_transcript`].
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.segments.is_empty() {
            return Err(CorpusError::EmptyTranscript(self.id.clone()));
        }
        let mut seen = HashSet::new();
        for (pos, seg) in self.segments.iter().enumerate() {
            if seg.index != pos {
                return Err(CorpusError::MalformedRecord {
                    line: pos + 1,
                    reason: format!("index {} out of order, expected {pos}", seg.index),
                });
            }
            if seg.text.is_empty() && !seg.silence {
                return Err(CorpusError::MalformedRecord {
                    line: pos + 1,
                    reason: "empty text on a segment not flagged as silence".into(),
                });
            }
            if !seen.insert(seg.id.as_str()) {
                return Err(CorpusError::DuplicateSegmentId {
                    transcript: self.id.clone(),
                    id: seg.id.clone(),
                    line: pos + 1,
                });
            }
        }
        Ok(())
    }
}

/// Header information for a transcript, as it appears in a manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptMeta {
    pub id: String,
    pub teacher_id: String,
    pub group_id: String,
    pub grade: u8,
    pub trimester: u8,
    pub academic_year: String,
}

#[derive(Debug, Deserialize, Serialize)]
struct SegmentRecord {
    id: String,
    index: usize,
    text: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    silence: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    start_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    end_ms: Option<u64>,
}

/// Reads a JSON Lines transcript and attaches `meta`.
///
/// Blank lines are skipped; every other line must be a segment record whose
/// `index` equals its position. Token counts are computed with `config`.
pub fn ingest_transcript<R: BufRead>(
    reader: R,
    meta: &TranscriptMeta,
    config: &NormalizationConfig,
) -> Result<Transcript, CorpusError> {
    for (field, value) in [
        ("id", &meta.id),
        ("teacher_id", &meta.teacher_id),
        ("group_id", &meta.group_id),
        ("academic_year", &meta.academic_year),
    ] {
        if value.trim().is_empty() {
            return Err(CorpusError::MissingMetadata(field));
        }
    }
    let grade = Grade::new(meta.grade)?;
    let trimester = Trimester::new(meta.trimester)?;

    let mut segments = Vec::new();
    let mut seen = HashSet::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SegmentRecord =
            serde_json::from_str(&line).map_err(|e| CorpusError::MalformedRecord {
                line: line_no,
                reason: e.to_string(),
            })?;
        if rec.index != segments.len() {
            return Err(CorpusError::MalformedRecord {
                line: line_no,
                reason: format!("index {} but expected {}", rec.index, segments.len()),
            });
        }
        if rec.text.is_empty() && !rec.silence {
            return Err(CorpusError::MalformedRecord {
                line: line_no,
                reason: "empty text on a segment not flagged as silence".into(),
            });
        }
        if !seen.insert(rec.id.clone()) {
            return Err(CorpusError::DuplicateSegmentId {
                transcript: meta.id.clone(),
                id: rec.id,
                line: line_no,
            });
        }
        segments.push(Segment {
            token_count: token_count(&rec.text, config),
            id: rec.id,
            index: rec.index,
            text: rec.text,
            silence: rec.silence,
            start_ms: rec.start_ms,
            end_ms: rec.end_ms,
        });
    }
    if segments.is_empty() {
        return Err(CorpusError::EmptyTranscript(meta.id.clone()));
    }
    Ok(Transcript {
        id: meta.id.clone(),
        teacher_id: meta.teacher_id.clone(),
        group_id: meta.group_id.clone(),
        grade,
        trimester,
        academic_year: meta.academic_year.clone(),
        segments,
    })
}

/// Writes the segment records of `transcript` in the format
/// [`ingest_transcript`] reads.
pub fn write_transcript<W: Write>(transcript: &Transcript, mut out: W) -> std::io::Result<()> {
    for seg in &transcript.segments {
        let rec = SegmentRecord {
            id: seg.id.clone(),
            index: seg.index,
            text: seg.text.clone(),
            silence: seg.silence,
            start_ms: seg.start_ms,
            end_ms: seg.end_ms,
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub transcripts: Vec<Transcript>,
    pub group_registry: GroupRegistry,
}

impl Corpus {
    /// Builds a corpus, checking that every transcript's grade is registered
    /// with at least one group and that transcript ids are unique.
    pub fn new(transcripts: Vec<Transcript>, group_registry: GroupRegistry) -> Result<Self, CorpusError> {
        let corpus = Corpus {
            transcripts,
            group_registry,
        };
        corpus.check_registry()?;
        Ok(corpus)
    }

    fn check_registry(&self) -> Result<(), CorpusError> {
        for (&grade, &groups) in &self.group_registry {
            if groups == 0 {
                return Err(CorpusError::ZeroGroups(grade));
            }
        }
        let mut ids = HashSet::new();
        for t in &self.transcripts {
            if !ids.insert(t.id.as_str()) {
                return Err(CorpusError::DuplicateTranscriptId(t.id.clone()));
            }
            if !self.group_registry.contains_key(&t.grade) {
                return Err(CorpusError::RegistryGap {
                    transcript: t.id.clone(),
                    grade: t.grade,
                });
            }
        }
        Ok(())
    }

    /// Full structural validation, for corpora deserialized from a document.
    pub fn validate(&self) -> Result<(), CorpusError> {
        for t in &self.transcripts {
            t.validate()?;
        }
        self.check_registry()
    }

    pub fn transcript(&self, id: &str) -> Option<&Transcript> {
        self.transcripts.iter().find(|t| t.id == id)
    }

    pub fn token_count(&self) -> u64 {
        self.transcripts.iter().map(Transcript::token_count).sum()
    }

    pub fn segment_count(&self) -> usize {
        self.transcripts.iter().map(|t| t.segments.len()).sum()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    #[serde(flatten)]
    pub meta: TranscriptMeta,
}

/// Corpus manifest. Relative transcript paths resolve against the manifest's
/// directory; a missing `group_registry` falls back to
/// [`default_group_registry`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default = "default_group_registry")]
    pub group_registry: GroupRegistry,
    pub transcripts: Vec<ManifestEntry>,
}

pub fn load_corpus(manifest_path: &Path, config: &NormalizationConfig) -> Result<Corpus, CorpusError> {
    let file = std::fs::File::open(manifest_path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CorpusError::MissingFile(manifest_path.to_path_buf()),
        _ => CorpusError::Io(e),
    })?;
    let manifest: Manifest = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| CorpusError::Manifest(e.to_string()))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    load_manifest(&manifest, base, config)
}

pub fn load_manifest(manifest: &Manifest, base: &Path, config: &NormalizationConfig) -> Result<Corpus, CorpusError> {
    let mut transcripts = Vec::with_capacity(manifest.transcripts.len());
    for entry in &manifest.transcripts {
        let path = base.join(&entry.path);
        let file = std::fs::File::open(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CorpusError::MissingFile(path.clone()),
            _ => CorpusError::Io(e),
        })?;
        transcripts.push(ingest_transcript(BufReader::new(file), &entry.meta, config)?);
    }
    Corpus::new(transcripts, manifest.group_registry.clone())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats<S = f64> {
    pub transcript_count: usize,
    pub segment_count: usize,
    pub token_count: u64,
    pub words_per_page: u64,
    pub page_equivalents: S,
}

impl<S: Scalar> Add for CorpusStats<S> {
    type Output = CorpusStats<S>;

    /// Fieldwise sum. Both sides must use the same page size.
    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.words_per_page, rhs.words_per_page, "page sizes differ");
        CorpusStats {
            transcript_count: self.transcript_count + rhs.transcript_count,
            segment_count: self.segment_count + rhs.segment_count,
            token_count: self.token_count + rhs.token_count,
            words_per_page: self.words_per_page,
            page_equivalents: self.page_equivalents + rhs.page_equivalents,
        }
    }
}

pub const DEFAULT_WORDS_PER_PAGE: u64 = 300;

pub fn corpus_stats<S: Scalar>(corpus: &Corpus, words_per_page: NonZeroU64) -> CorpusStats<S> {
    let tokens = corpus.token_count();
    CorpusStats {
        transcript_count: corpus.transcripts.len(),
        segment_count: corpus.segment_count(),
        token_count: tokens,
        words_per_page: words_per_page.get(),
        page_equivalents: S::ratio(tokens, words_per_page.get()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::normalize;
    use crate::Rational;
    use proptest::prelude::*;

    fn meta(id: &str, grade: u8) -> TranscriptMeta {
        TranscriptMeta {
            id: id.into(),
            teacher_id: "teacher-1".into(),
            group_id: "group-a".into(),
            grade,
            trimester: 1,
            academic_year: "2021-22".into(),
        }
    }

    fn cfg() -> NormalizationConfig {
        NormalizationConfig::default()
    }

    const THREE: &str = r#"{"id":"s0","index":0,"text":"Buenos días, chicos."}
{"id":"s1","index":1,"text":"Mañana hay examen."}
{"id":"s2","index":2,"text":"Si estudiáis, aprobaréis."}
"#;

    #[test]
    fn ingests_three_segments() {
        let t = ingest_transcript(THREE.as_bytes(), &meta("t1", 9), &cfg()).unwrap();
        assert_eq!(t.segments.len(), 3);
        let idx: Vec<_> = t.segments.iter().map(|s| s.index).collect();
        assert_eq!(idx, [0, 1, 2]);
        assert_eq!(t.grade.get(), 9);
        assert_eq!(t.segments[1].token_count, 3);
    }

    #[test]
    fn empty_file_is_rejected() {
        let err = ingest_transcript("\n\n".as_bytes(), &meta("t1", 9), &cfg()).unwrap_err();
        assert!(matches!(err, CorpusError::EmptyTranscript(_)));
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let src = "{\"id\":\"s1\",\"index\":0,\"text\":\"hola\"}\n{\"id\":\"s1\",\"index\":1,\"text\":\"adiós\"}\n";
        let err = ingest_transcript(src.as_bytes(), &meta("t1", 9), &cfg()).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateSegmentId { line: 2, .. }));
    }

    #[test]
    fn grade_and_trimester_domains() {
        let err = ingest_transcript(THREE.as_bytes(), &meta("t1", 8), &cfg()).unwrap_err();
        assert!(matches!(err, CorpusError::InvalidGrade(8)));
        let mut m = meta("t1", 9);
        m.trimester = 4;
        let err = ingest_transcript(THREE.as_bytes(), &m, &cfg()).unwrap_err();
        assert!(matches!(err, CorpusError::InvalidTrimester(4)));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let src = "{\"id\":\"s0\",\"index\":0,\"text\":\"hola\"}\n{not json}\n";
        let err = ingest_transcript(src.as_bytes(), &meta("t1", 9), &cfg()).unwrap_err();
        assert!(matches!(err, CorpusError::MalformedRecord { line: 2, .. }));
        let gap = "{\"id\":\"s0\",\"index\":1,\"text\":\"hola\"}\n";
        let err = ingest_transcript(gap.as_bytes(), &meta("t1", 9), &cfg()).unwrap_err();
        assert!(matches!(err, CorpusError::MalformedRecord { line: 1, .. }));
    }

    #[test]
    fn silence_placeholders_may_be_empty() {
        let ok = "{\"id\":\"s0\",\"index\":0,\"text\":\"\",\"silence\":true}\n";
        let t = ingest_transcript(ok.as_bytes(), &meta("t1", 9), &cfg()).unwrap();
        assert_eq!(t.segments[0].token_count, 0);
        let bad = "{\"id\":\"s0\",\"index\":0,\"text\":\"\"}\n";
        assert!(ingest_transcript(bad.as_bytes(), &meta("t1", 9), &cfg()).is_err());
    }

    #[test]
    fn incomplete_metadata_is_rejected() {
        let mut m = meta("t1", 9);
        m.teacher_id = " ".into();
        let err = ingest_transcript(THREE.as_bytes(), &m, &cfg()).unwrap_err();
        assert!(matches!(err, CorpusError::MissingMetadata("teacher_id")));
    }

    #[test]
    fn registry_gap_and_zero_groups() {
        let t = ingest_transcript(THREE.as_bytes(), &meta("t1", 11), &cfg()).unwrap();
        let mut reg = default_group_registry();
        reg.remove(&Grade(11));
        assert!(matches!(
            Corpus::new(vec![t.clone()], reg),
            Err(CorpusError::RegistryGap { .. })
        ));
        let mut reg = default_group_registry();
        reg.insert(Grade(11), 0);
        assert!(matches!(Corpus::new(vec![t], reg), Err(CorpusError::ZeroGroups(_))));
    }

    #[test]
    fn registry_survives_buffered_deserialization() {
        #[derive(Serialize, Deserialize)]
        #[serde(tag = "type")]
        enum Wrapped {
            Registry { registry: GroupRegistry },
        }
        let text = serde_json::to_string(&Wrapped::Registry { registry: default_group_registry() }).unwrap();
        let Wrapped::Registry { registry } = serde_json::from_str(&text).unwrap();
        assert_eq!(registry, default_group_registry());
        assert!(serde_json::from_str::<Grade>("\"8\"").is_err());
        assert!(serde_json::from_str::<Grade>("\"x\"").is_err());
    }

    #[test]
    fn default_registry_matches_study_design() {
        let reg = default_group_registry();
        let counts: Vec<u32> = reg.values().copied().collect();
        assert_eq!(counts, [41, 30, 18, 37]);
        assert_eq!(counts.iter().sum::<u32>(), 126);
    }

    fn synthetic_transcript(id: &str, tokens_per_segment: &[usize]) -> Transcript {
        Transcript {
            id: id.into(),
            teacher_id: "t".into(),
            group_id: "g".into(),
            grade: Grade(9),
            trimester: Trimester(1),
            academic_year: "y".into(),
            segments: tokens_per_segment
                .iter()
                .enumerate()
                .map(|(i, &n)| Segment {
                    id: format!("s{i}"),
                    index: i,
                    text: vec!["palabra"; n].join(" "),
                    token_count: n,
                    silence: n == 0,
                    start_ms: None,
                    end_ms: None,
                })
                .collect(),
        }
    }

    #[test]
    fn page_equivalents() {
        let wpp = NonZeroU64::new(300).unwrap();
        let c = Corpus::new(vec![synthetic_transcript("a", &[100, 200])], default_group_registry()).unwrap();
        let s: CorpusStats = corpus_stats(&c, wpp);
        assert_eq!(s.page_equivalents, 1.0);

        // 61 recordings totalling 225,000 tokens -> 750 pages at 300 words/page.
        let transcripts = (0..61)
            .map(|i| {
                let per = if i < 60 { 3700 } else { 225_000 - 60 * 3700 };
                synthetic_transcript(&format!("t{i}"), &[per])
            })
            .collect();
        let c = Corpus::new(transcripts, default_group_registry()).unwrap();
        let s: CorpusStats<Rational> = corpus_stats(&c, wpp);
        assert_eq!(s.transcript_count, 61);
        assert_eq!(s.token_count, 225_000);
        assert_eq!(s.page_equivalents, Rational::from_integer(750));
    }

    proptest! {
        #[test]
        fn export_then_ingest_roundtrips(texts in proptest::collection::vec("[a-zA-Zñá ,.!]{1,30}", 1..8)) {
            let src: String = texts
                .iter()
                .enumerate()
                .map(|(i, t)| serde_json::json!({"id": format!("seg-{i}"), "index": i, "text": t}).to_string() + "\n")
                .collect();
            let t = ingest_transcript(src.as_bytes(), &meta("rt", 10), &cfg()).unwrap();
            let mut buf = Vec::new();
            write_transcript(&t, &mut buf).unwrap();
            let again = ingest_transcript(buf.as_slice(), &t.meta(), &cfg()).unwrap();
            prop_assert_eq!(t, again);
        }

        #[test]
        fn token_count_matches_independent_retokenization(texts in proptest::collection::vec("\\PC{1,30}", 1..6)) {
            let src: String = texts
                .iter()
                .enumerate()
                .map(|(i, t)| serde_json::json!({"id": i.to_string(), "index": i, "text": t}).to_string() + "\n")
                .collect();
            let t = ingest_transcript(src.as_bytes(), &meta("tc", 12), &cfg()).unwrap();
            let expected: usize = texts.iter().map(|x| normalize(x, &cfg()).len()).sum();
            prop_assert_eq!(t.token_count(), expected as u64);
        }

        #[test]
        fn stats_are_additive(a in proptest::collection::vec(proptest::collection::vec(0usize..50, 1..5), 1..4),
                              b in proptest::collection::vec(proptest::collection::vec(0usize..50, 1..5), 1..4),
                              wpp in 1u64..500) {
            let wpp = NonZeroU64::new(wpp).unwrap();
            let mk = |prefix: &str, spec: &[Vec<usize>]| spec
                .iter()
                .enumerate()
                .map(|(i, segs)| synthetic_transcript(&format!("{prefix}{i}"), segs))
                .collect::<Vec<_>>();
            let ta = mk("a", &a);
            let tb = mk("b", &b);
            let ca = Corpus::new(ta.clone(), default_group_registry()).unwrap();
            let cb = Corpus::new(tb.clone(), default_group_registry()).unwrap();
            let cu = Corpus::new(ta.into_iter().chain(tb).collect(), default_group_registry()).unwrap();
            let sum = corpus_stats::<Rational>(&ca, wpp) + corpus_stats::<Rational>(&cb, wpp);
            prop_assert_eq!(corpus_stats::<Rational>(&cu, wpp), sum);
        }
    }
}
