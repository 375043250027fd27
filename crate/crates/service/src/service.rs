//! Coding-session operations on top of the event log.
//!
//! Every mutation is checked against the current state, written to the log,
//! and only then folded in. Leases are deliberately not logged: they are
//! short-lived claims and a restart simply releases them.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Arc;

use engage_core::codebook::{validate_annotation, Decision, DecisionParts, MessageAnnotation, Span};
use engage_core::corpus::Corpus;
use engage_core::filtering::FilteredSet;
use engage_core::reliability::{agreement_report, align_annotations, AnnotationSet, DEFAULT_OVERLAP_THRESHOLD};
use engage_core::AgreementReport;
use serde::{Deserialize, Serialize};

use crate::clock::Clock;
use crate::error::ServiceError;
use crate::log::{EventLog, Recovery};
use crate::state::{AssignmentPolicy, Event, FilteredRef, Session, SessionSpec, SessionStatus, State, StoredCorpus};

pub const DEFAULT_LEASE_MS: u64 = 15 * 60 * 1000;
pub const DEFAULT_CONTEXT_WINDOW: usize = 2;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusUpload {
    pub corpus_id: String,
    pub corpus: Corpus,
    #[serde(default)]
    pub filtered_sets: Vec<FilteredSet>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub corpus_id: String,
    pub transcripts: usize,
    pub segments: usize,
    pub filtered_sets: Vec<FilteredRef>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionRequest {
    pub corpus_id: String,
    pub filtered: FilteredRef,
    pub roster: Vec<String>,
    pub policy: AssignmentPolicy,
    #[serde(default)]
    pub context_window: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub corpus_id: String,
    pub filtered: FilteredRef,
    pub roster: Vec<String>,
    pub policy: AssignmentPolicy,
    pub status: SessionStatus,
    pub context_window: usize,
    pub items_total: usize,
    pub queue_sizes: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextSegment {
    pub index: usize,
    pub text: String,
    pub focus: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lease {
    pub coder: String,
    pub expires_at: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodingItem {
    pub item_id: String,
    pub transcript_id: String,
    pub focus_index: usize,
    pub segment_count: usize,
    pub context: Vec<ContextSegment>,
    pub matches: Vec<String>,
    pub lease: Lease,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum NextItem {
    Item { item: CodingItem },
    Done,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Submission {
    pub coder: String,
    pub item_id: String,
    pub decision: DecisionParts,
    /// Segment range if the coder widened or moved the span; defaults to the
    /// focus segment.
    #[serde(default)]
    pub span: Option<Span>,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ack {
    pub annotation_id: String,
    pub item_id: String,
    /// True when this repeats an earlier identical submission.
    pub replayed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoderProgress {
    pub assigned: usize,
    pub completed: usize,
    pub leased: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressReport {
    pub session_id: String,
    pub status: SessionStatus,
    pub items_total: usize,
    pub annotations: usize,
    pub per_coder: BTreeMap<String, CoderProgress>,
    /// Overall percent agreement once both reliability coders share a unit.
    pub agreement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiveAgreement {
    pub coders: [String; 2],
    pub shared_items: usize,
    pub report: AgreementReport,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AdjudicationRequest {
    #[serde(default)]
    pub overrides: Vec<Override>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Override {
    pub item_id: String,
    pub decision: DecisionParts,
    #[serde(default)]
    pub span: Option<Span>,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportSet {
    #[default]
    Raw,
    Adjudicated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationExport {
    pub session_id: String,
    pub corpus_id: String,
    pub set: ExportSet,
    pub annotations: Vec<MessageAnnotation>,
}

pub struct CodingService {
    state: State,
    log: EventLog,
    clock: Arc<dyn Clock>,
    lease_ms: u64,
    leases: HashMap<(String, String, String), u64>,
    recovery: Recovery,
}

fn decision_of(parts: DecisionParts) -> Result<Decision, ServiceError> {
    Decision::try_from(parts).map_err(|v| ServiceError::ValidationFailed(vec![v]))
}

fn fingerprint(decision: Decision, span: Span, note: &Option<String>) -> String {
    serde_json::json!({ "decision": decision, "span": span, "note": note }).to_string()
}

impl CodingService {
    pub fn open(
        data_dir: &Path,
        clock: Arc<dyn Clock>,
        lease_ms: u64,
        snapshot_every: u64,
    ) -> Result<Self, ServiceError> {
        let (log, state, recovery) = EventLog::open(data_dir, snapshot_every)?;
        Ok(CodingService {
            state,
            log,
            clock,
            lease_ms,
            leases: HashMap::new(),
            recovery,
        })
    }

    pub fn recovery(&self) -> &Recovery {
        &self.recovery
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    fn commit(&mut self, event: Event) -> Result<(), ServiceError> {
        self.log.append(&event)?;
        self.state.apply(event).map_err(ServiceError::Storage)?;
        if self.log.snapshot_due() {
            self.log.write_snapshot(&self.state)?;
        }
        Ok(())
    }

    fn stored(&self, corpus_id: &str) -> Result<&StoredCorpus, ServiceError> {
        self.state
            .corpora
            .get(corpus_id)
            .ok_or_else(|| ServiceError::UnknownCorpus(corpus_id.into()))
    }

    fn session(&self, id: &str) -> Result<&Session, ServiceError> {
        self.state.sessions.get(id).ok_or_else(|| ServiceError::UnknownSession(id.into()))
    }

    fn open_session(&self, id: &str) -> Result<&Session, ServiceError> {
        let s = self.session(id)?;
        if s.status == SessionStatus::Closed {
            return Err(ServiceError::SessionClosed(id.into()));
        }
        Ok(s)
    }

    fn check_coder(s: &Session, coder: &str) -> Result<(), ServiceError> {
        if s.queues.contains_key(coder) {
            Ok(())
        } else {
            Err(ServiceError::UnknownCoder {
                session: s.spec.id.clone(),
                coder: coder.into(),
            })
        }
    }

    /// Stores a corpus and any filtered sets sent with it. Re-sending an
    /// identical corpus is accepted; different content under a known id is not.
    pub fn register_corpus(&mut self, upload: CorpusUpload) -> Result<CorpusSummary, ServiceError> {
        if upload.corpus_id.trim().is_empty() {
            return Err(ServiceError::BadRequest("corpus_id is empty".into()));
        }
        upload.corpus.validate().map_err(|e| ServiceError::InvalidCorpus(e.to_string()))?;
        for set in &upload.filtered_sets {
            set.check_against(&upload.corpus)
                .map_err(|e| ServiceError::InvalidFilteredSet(e.to_string()))?;
        }
        match self.state.corpora.get(&upload.corpus_id) {
            Some(existing) if existing.corpus != upload.corpus => {
                return Err(ServiceError::CorpusConflict(upload.corpus_id));
            }
            Some(_) => {}
            None => self.commit(Event::CorpusRegistered {
                corpus_id: upload.corpus_id.clone(),
                corpus: upload.corpus,
            })?,
        }
        for set in upload.filtered_sets {
            self.add_filtered(&upload.corpus_id, set)?;
        }
        self.corpus_summary(&upload.corpus_id)
    }

    fn add_filtered(&mut self, corpus_id: &str, set: FilteredSet) -> Result<(), ServiceError> {
        let known = self.stored(corpus_id)?.filtered(&FilteredRef::of(&set));
        if known == Some(&set) {
            return Ok(());
        }
        self.commit(Event::FilteredSetRegistered {
            corpus_id: corpus_id.into(),
            set,
        })
    }

    pub fn register_filtered(&mut self, corpus_id: &str, set: FilteredSet) -> Result<FilteredRef, ServiceError> {
        let stored = self.stored(corpus_id)?;
        set.check_against(&stored.corpus)
            .map_err(|e| ServiceError::InvalidFilteredSet(e.to_string()))?;
        let r = FilteredRef::of(&set);
        self.add_filtered(corpus_id, set)?;
        Ok(r)
    }

    pub fn corpus_summary(&self, corpus_id: &str) -> Result<CorpusSummary, ServiceError> {
        let s = self.stored(corpus_id)?;
        Ok(CorpusSummary {
            corpus_id: corpus_id.into(),
            transcripts: s.corpus.transcripts.len(),
            segments: s.corpus.segment_count(),
            filtered_sets: s.filtered.iter().map(FilteredRef::of).collect(),
        })
    }

    pub fn create_session(&mut self, req: SessionRequest) -> Result<SessionSummary, ServiceError> {
        let stored = self.stored(&req.corpus_id)?;
        if stored.filtered(&req.filtered).is_none() {
            return Err(ServiceError::UnknownFilteredSet {
                corpus_id: req.corpus_id,
                list_name: req.filtered.list_name,
                config_hash: req.filtered.config_hash,
            });
        }
        if req.roster.is_empty() {
            return Err(ServiceError::EmptyRoster);
        }
        for (i, c) in req.roster.iter().enumerate() {
            if c.trim().is_empty() {
                return Err(ServiceError::BadRequest("coder ids must be nonempty".into()));
            }
            if req.roster[..i].contains(c) {
                return Err(ServiceError::DuplicateCoder(c.clone()));
            }
        }
        if let AssignmentPolicy::Double { reliability_percent } = req.policy {
            if req.roster.len() < 2 {
                return Err(ServiceError::DoubleNeedsTwo);
            }
            if !(1..=100).contains(&reliability_percent) {
                return Err(ServiceError::InvalidPercent(reliability_percent));
            }
        }
        let id = format!("session-{:04}", self.state.sessions.len() + 1);
        let spec = SessionSpec {
            id: id.clone(),
            corpus_id: req.corpus_id,
            filtered: req.filtered,
            roster: req.roster,
            policy: req.policy,
            context_window: req.context_window.unwrap_or(DEFAULT_CONTEXT_WINDOW),
            created_at: self.clock.now_ms(),
        };
        self.commit(Event::SessionCreated { spec })?;
        self.session_summary(&id)
    }

    pub fn session_summary(&self, id: &str) -> Result<SessionSummary, ServiceError> {
        let s = self.session(id)?;
        Ok(SessionSummary {
            id: s.spec.id.clone(),
            corpus_id: s.spec.corpus_id.clone(),
            filtered: s.spec.filtered.clone(),
            roster: s.spec.roster.clone(),
            policy: s.spec.policy,
            status: s.status,
            context_window: s.spec.context_window,
            items_total: s.items.len(),
            queue_sizes: s.queues.iter().map(|(c, q)| (c.clone(), q.len())).collect(),
        })
    }

    fn lease_key(session: &str, coder: &str, item: &str) -> (String, String, String) {
        (session.into(), coder.into(), item.into())
    }

    fn live_lease(&self, session: &str, coder: &str, item: &str, now: u64) -> Option<u64> {
        self.leases
            .get(&Self::lease_key(session, coder, item))
            .copied()
            .filter(|&exp| exp > now)
    }

    /// Leases the first item in the coder's queue that is neither completed
    /// nor under a live lease.
    pub fn next_item(&mut self, session_id: &str, coder: &str) -> Result<NextItem, ServiceError> {
        let now = self.clock.now_ms();
        let s = self.open_session(session_id)?;
        Self::check_coder(s, coder)?;
        let pick = s.queues[coder].iter().map(|&k| &s.items[k]).find(|item| {
            s.completion(coder, &item.item_id).is_none()
                && self.live_lease(session_id, coder, &item.item_id, now).is_none()
        });
        let Some(item) = pick else {
            return Ok(NextItem::Done);
        };
        let transcript = self
            .stored(&s.spec.corpus_id)?
            .corpus
            .transcript(&item.transcript_id)
            .ok_or_else(|| ServiceError::Storage(format!("transcript {} vanished", item.transcript_id)))?;
        let w = s.spec.context_window;
        let lo = item.focus_index.saturating_sub(w);
        let hi = (item.focus_index + w).min(transcript.segments.len().saturating_sub(1));
        let expires_at = now + self.lease_ms;
        let coding_item = CodingItem {
            item_id: item.item_id.clone(),
            transcript_id: item.transcript_id.clone(),
            focus_index: item.focus_index,
            segment_count: transcript.segments.len(),
            context: transcript.segments[lo..=hi]
                .iter()
                .map(|seg| ContextSegment {
                    index: seg.index,
                    text: seg.text.clone(),
                    focus: seg.index == item.focus_index,
                })
                .collect(),
            matches: item.matches.clone(),
            lease: Lease {
                coder: coder.into(),
                expires_at,
            },
        };
        self.leases.insert(Self::lease_key(session_id, coder, &coding_item.item_id), expires_at);
        Ok(NextItem::Item { item: coding_item })
    }

    pub fn submit(&mut self, session_id: &str, sub: Submission) -> Result<Ack, ServiceError> {
        let now = self.clock.now_ms();
        let s = self.open_session(session_id)?;
        Self::check_coder(s, &sub.coder)?;
        let in_queue = s.queues[&sub.coder].iter().any(|&k| s.items[k].item_id == sub.item_id);
        let item = s.item(&sub.item_id).filter(|_| in_queue).ok_or_else(|| ServiceError::UnknownItem {
            coder: sub.coder.clone(),
            item: sub.item_id.clone(),
        })?;
        let decision = decision_of(sub.decision)?;
        let span = sub.span.unwrap_or(Span::single(item.focus_index));
        let print = fingerprint(decision, span, &sub.note);

        if let Some(done) = s.completion(&sub.coder, &sub.item_id) {
            if done.fingerprint == print {
                return Ok(Ack {
                    annotation_id: done.annotation_id.clone(),
                    item_id: sub.item_id,
                    replayed: true,
                });
            }
            return Err(ServiceError::DuplicateSubmission {
                coder: sub.coder,
                item: sub.item_id,
                annotation_id: done.annotation_id.clone(),
            });
        }
        if self.live_lease(session_id, &sub.coder, &sub.item_id, now).is_none() {
            return Err(ServiceError::LeaseLost {
                coder: sub.coder,
                item: sub.item_id,
            });
        }

        let annotation = MessageAnnotation {
            id: format!("{session_id}-a{:06}", s.annotations.len() + 1),
            coder_id: sub.coder.clone(),
            transcript_id: item.transcript_id.clone(),
            span,
            decision,
            note: sub.note,
            created_at: now,
        };
        let transcript = self
            .stored(&s.spec.corpus_id)?
            .corpus
            .transcript(&item.transcript_id)
            .ok_or_else(|| ServiceError::Storage(format!("transcript {} vanished", item.transcript_id)))?;
        let report = validate_annotation(&annotation, transcript).map_err(|e| ServiceError::Storage(e.to_string()))?;
        if !report.is_valid() {
            return Err(ServiceError::ValidationFailed(report.violations));
        }
        let ack = Ack {
            annotation_id: annotation.id.clone(),
            item_id: sub.item_id.clone(),
            replayed: false,
        };
        self.commit(Event::AnnotationSubmitted {
            session_id: session_id.into(),
            item_id: sub.item_id.clone(),
            fingerprint: print,
            annotation,
        })?;
        self.leases.remove(&Self::lease_key(session_id, &sub.coder, &sub.item_id));
        Ok(ack)
    }

    pub fn progress(&self, session_id: &str) -> Result<ProgressReport, ServiceError> {
        let now = self.clock.now_ms();
        let s = self.session(session_id)?;
        let per_coder = s
            .queues
            .iter()
            .map(|(coder, queue)| {
                let completed = s.completions.get(coder).map_or(0, |m| m.len());
                let leased = queue
                    .iter()
                    .filter(|&&k| {
                        let id = &s.items[k].item_id;
                        s.completion(coder, id).is_none() && self.live_lease(session_id, coder, id, now).is_some()
                    })
                    .count();
                (
                    coder.clone(),
                    CoderProgress {
                        assigned: queue.len(),
                        completed,
                        leased,
                    },
                )
            })
            .collect();
        let agreement = match self.live_agreement(session_id) {
            Ok(a) => Some(a.report.overall_percent),
            Err(ServiceError::NotDoubleCoded(_) | ServiceError::NoUnits) => None,
            Err(e) => return Err(e),
        };
        Ok(ProgressReport {
            session_id: session_id.into(),
            status: s.status,
            items_total: s.items.len(),
            annotations: s.annotations.len(),
            per_coder,
            agreement,
        })
    }

    /// Annotation sets of the two reliability coders restricted to items
    /// both have completed.
    pub fn reliability_sets(&self, session_id: &str) -> Result<(AnnotationSet, AnnotationSet, usize), ServiceError> {
        let s = self.session(session_id)?;
        let (a, b) = s
            .reliability_pair()
            .ok_or_else(|| ServiceError::NotDoubleCoded(session_id.into()))?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for item in s.items.iter().filter(|i| i.reliability) {
            if let (Some(ca), Some(cb)) = (s.completion(a, &item.item_id), s.completion(b, &item.item_id)) {
                let find = |id: &str| {
                    s.annotation(id)
                        .cloned()
                        .ok_or_else(|| ServiceError::Storage(format!("annotation {id} missing")))
                };
                xs.push(find(&ca.annotation_id)?);
                ys.push(find(&cb.annotation_id)?);
            }
        }
        let shared = xs.len();
        let set = |annotations| AnnotationSet {
            corpus_id: s.spec.corpus_id.clone(),
            annotations,
        };
        Ok((set(xs), set(ys), shared))
    }

    pub fn live_agreement(&self, session_id: &str) -> Result<LiveAgreement, ServiceError> {
        let (xs, ys, shared) = self.reliability_sets(session_id)?;
        if shared == 0 {
            return Err(ServiceError::NoUnits);
        }
        let pairs = align_annotations(&xs, &ys, DEFAULT_OVERLAP_THRESHOLD)
            .map_err(|e| ServiceError::Storage(e.to_string()))?;
        let report = agreement_report(&pairs).map_err(|_| ServiceError::NoUnits)?;
        let s = self.session(session_id)?;
        Ok(LiveAgreement {
            coders: [s.spec.roster[0].clone(), s.spec.roster[1].clone()],
            shared_items: shared,
            report,
        })
    }

    pub fn close(&mut self, session_id: &str) -> Result<SessionSummary, ServiceError> {
        if self.session(session_id)?.status == SessionStatus::Open {
            self.commit(Event::SessionClosed {
                session_id: session_id.into(),
            })?;
            self.leases.retain(|(s, _, _), _| s != session_id);
        }
        self.session_summary(session_id)
    }

    /// Merges coders into one set: per item the annotation of the earliest
    /// roster coder who completed it, unless an override replaces it.
    pub fn adjudicate(&mut self, session_id: &str, req: AdjudicationRequest) -> Result<AnnotationExport, ServiceError> {
        let s = self.session(session_id)?;
        let mut overrides: HashMap<&str, &Override> = HashMap::new();
        for o in &req.overrides {
            if s.item(&o.item_id).is_none() {
                return Err(ServiceError::UnknownItem {
                    coder: "adjudicator".into(),
                    item: o.item_id.clone(),
                });
            }
            overrides.insert(o.item_id.as_str(), o);
        }
        let corpus = &self.stored(&s.spec.corpus_id)?.corpus;
        let now = self.clock.now_ms();
        let mut merged = Vec::new();
        for item in &s.items {
            if let Some(o) = overrides.get(item.item_id.as_str()) {
                let annotation = MessageAnnotation {
                    id: format!("{session_id}-x{:06}", merged.len() + 1),
                    coder_id: "adjudicator".into(),
                    transcript_id: item.transcript_id.clone(),
                    span: o.span.unwrap_or(Span::single(item.focus_index)),
                    decision: decision_of(o.decision.clone())?,
                    note: o.note.clone(),
                    created_at: now,
                };
                let t = corpus
                    .transcript(&item.transcript_id)
                    .ok_or_else(|| ServiceError::Storage(format!("transcript {} vanished", item.transcript_id)))?;
                let report = validate_annotation(&annotation, t).map_err(|e| ServiceError::Storage(e.to_string()))?;
                if !report.is_valid() {
                    return Err(ServiceError::ValidationFailed(report.violations));
                }
                merged.push(annotation);
                continue;
            }
            let winner = s
                .spec
                .roster
                .iter()
                .find_map(|c| s.completion(c, &item.item_id))
                .and_then(|c| s.annotation(&c.annotation_id));
            if let Some(a) = winner {
                merged.push(a.clone());
            }
        }
        self.commit(Event::Adjudicated {
            session_id: session_id.into(),
            annotations: merged,
        })?;
        self.export(session_id, ExportSet::Adjudicated, None)
    }

    pub fn export(&self, session_id: &str, set: ExportSet, coder: Option<&str>) -> Result<AnnotationExport, ServiceError> {
        let s = self.session(session_id)?;
        let source = match set {
            ExportSet::Raw => &s.annotations,
            ExportSet::Adjudicated => s.adjudicated.as_ref().ok_or_else(|| {
                ServiceError::BadRequest(format!("session {session_id} has not been adjudicated"))
            })?,
        };
        if let Some(c) = coder {
            Self::check_coder(s, c)?;
        }
        Ok(AnnotationExport {
            session_id: session_id.into(),
            corpus_id: s.spec.corpus_id.clone(),
            set,
            annotations: source
                .iter()
                .filter(|a| coder.is_none_or(|c| a.coder_id == c))
                .cloned()
                .collect(),
        })
    }
}
