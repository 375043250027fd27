//! Durable service state and the events that change it.
//!
//! State is a pure fold over the event log: [`State::apply`] never consults
//! the clock or any other outside input, so replaying the same log always
//! rebuilds the same state.

use std::collections::BTreeMap;

use engage_core::codebook::MessageAnnotation;
use engage_core::corpus::Corpus;
use engage_core::filtering::FilteredSet;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FilteredRef {
    pub list_name: String,
    pub config_hash: String,
}

impl FilteredRef {
    pub fn of(set: &FilteredSet) -> Self {
        FilteredRef {
            list_name: set.list_name.clone(),
            config_hash: set.config_hash.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredCorpus {
    pub corpus: Corpus,
    pub filtered: Vec<FilteredSet>,
}

impl StoredCorpus {
    pub fn filtered(&self, r: &FilteredRef) -> Option<&FilteredSet> {
        self.filtered
            .iter()
            .find(|f| f.list_name == r.list_name && f.config_hash == r.config_hash)
    }
}

/// How items are spread over the roster.
///
/// `Single` deals items round-robin so each is coded once. `Double` sends a
/// reliability slice of the items to both of the first two roster coders
/// and deals the rest round-robin over everyone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AssignmentPolicy {
    Single,
    Double {
        #[serde(default = "full_slice")]
        reliability_percent: u8,
    },
}

fn full_slice() -> u8 {
    100
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Open,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemSpec {
    pub item_id: String,
    pub transcript_id: String,
    pub focus_index: usize,
    pub segment_id: String,
    pub matches: Vec<String>,
    /// Coded by both reliability coders under a double policy.
    pub reliability: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub annotation_id: String,
    pub fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSpec {
    pub id: String,
    pub corpus_id: String,
    pub filtered: FilteredRef,
    pub roster: Vec<String>,
    pub policy: AssignmentPolicy,
    pub context_window: usize,
    pub created_at: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub spec: SessionSpec,
    pub status: SessionStatus,
    pub items: Vec<ItemSpec>,
    /// Item positions per coder, in queue order.
    pub queues: BTreeMap<String, Vec<usize>>,
    /// Coder to item id to the annotation that completed it.
    pub completions: BTreeMap<String, BTreeMap<String, Completion>>,
    /// Every accepted annotation in submission order.
    pub annotations: Vec<MessageAnnotation>,
    pub adjudicated: Option<Vec<MessageAnnotation>>,
}

/// Whether position `k` of `n` belongs to a `percent` slice, spread evenly
/// over the queue rather than taken from its front.
fn in_slice(k: usize, percent: u8) -> bool {
    let p = percent as usize;
    (k + 1) * p / 100 > k * p / 100
}

impl Session {
    /// Builds the item queue: transcript order of the filtered set, then
    /// segment index, one item per retained segment.
    pub fn materialize(spec: SessionSpec, set: &FilteredSet) -> Session {
        let mut items = Vec::new();
        for rec in &set.transcripts {
            let mut segs: Vec<_> = rec.segments.iter().collect();
            segs.sort_by_key(|s| s.index);
            for s in segs {
                let k = items.len();
                let reliability = match spec.policy {
                    AssignmentPolicy::Single => false,
                    AssignmentPolicy::Double { reliability_percent } => in_slice(k, reliability_percent),
                };
                items.push(ItemSpec {
                    item_id: format!("{}:{}", rec.transcript_id, s.index),
                    transcript_id: rec.transcript_id.clone(),
                    focus_index: s.index,
                    segment_id: s.id.clone(),
                    matches: s.matches.clone(),
                    reliability,
                });
            }
        }
        let mut queues: BTreeMap<String, Vec<usize>> =
            spec.roster.iter().map(|c| (c.clone(), Vec::new())).collect();
        let n = spec.roster.len();
        let mut dealt = 0usize;
        for (k, item) in items.iter().enumerate() {
            if item.reliability {
                for coder in &spec.roster[..2] {
                    queues.get_mut(coder).expect("roster coder").push(k);
                }
            } else {
                let coder = &spec.roster[dealt % n];
                queues.get_mut(coder).expect("roster coder").push(k);
                dealt += 1;
            }
        }
        Session {
            status: SessionStatus::Open,
            completions: spec.roster.iter().map(|c| (c.clone(), BTreeMap::new())).collect(),
            spec,
            items,
            queues,
            annotations: Vec::new(),
            adjudicated: None,
        }
    }

    pub fn item(&self, item_id: &str) -> Option<&ItemSpec> {
        self.items.iter().find(|i| i.item_id == item_id)
    }

    pub fn completion(&self, coder: &str, item_id: &str) -> Option<&Completion> {
        self.completions.get(coder).and_then(|m| m.get(item_id))
    }

    pub fn annotation(&self, id: &str) -> Option<&MessageAnnotation> {
        self.annotations.iter().find(|a| a.id == id)
    }

    pub fn reliability_pair(&self) -> Option<(&str, &str)> {
        match self.spec.policy {
            AssignmentPolicy::Double { .. } => Some((&self.spec.roster[0], &self.spec.roster[1])),
            AssignmentPolicy::Single => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    CorpusRegistered {
        corpus_id: String,
        corpus: Corpus,
    },
    FilteredSetRegistered {
        corpus_id: String,
        set: FilteredSet,
    },
    SessionCreated {
        spec: SessionSpec,
    },
    AnnotationSubmitted {
        session_id: String,
        item_id: String,
        fingerprint: String,
        annotation: MessageAnnotation,
    },
    SessionClosed {
        session_id: String,
    },
    Adjudicated {
        session_id: String,
        annotations: Vec<MessageAnnotation>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub corpora: BTreeMap<String, StoredCorpus>,
    pub sessions: BTreeMap<String, Session>,
}

impl State {
    /// Folds one event into the state. Errors only when the event does not
    /// fit the state, which means the log is damaged.
    pub fn apply(&mut self, event: Event) -> Result<(), String> {
        match event {
            Event::CorpusRegistered { corpus_id, corpus } => {
                self.corpora.entry(corpus_id).or_insert(StoredCorpus {
                    corpus,
                    filtered: Vec::new(),
                });
            }
            Event::FilteredSetRegistered { corpus_id, set } => {
                let stored = self
                    .corpora
                    .get_mut(&corpus_id)
                    .ok_or_else(|| format!("filtered set for unknown corpus {corpus_id}"))?;
                let r = FilteredRef::of(&set);
                stored.filtered.retain(|f| FilteredRef::of(f) != r);
                stored.filtered.push(set);
            }
            Event::SessionCreated { spec } => {
                let set = self
                    .corpora
                    .get(&spec.corpus_id)
                    .and_then(|c| c.filtered(&spec.filtered))
                    .ok_or_else(|| format!("session {} references a missing filtered set", spec.id))?;
                let session = Session::materialize(spec, set);
                self.sessions.insert(session.spec.id.clone(), session);
            }
            Event::AnnotationSubmitted {
                session_id,
                item_id,
                fingerprint,
                annotation,
            } => {
                let s = self.session_mut(&session_id)?;
                let coder = annotation.coder_id.clone();
                s.completions.entry(coder).or_default().insert(
                    item_id,
                    Completion {
                        annotation_id: annotation.id.clone(),
                        fingerprint,
                    },
                );
                s.annotations.push(annotation);
            }
            Event::SessionClosed { session_id } => {
                self.session_mut(&session_id)?.status = SessionStatus::Closed;
            }
            Event::Adjudicated {
                session_id,
                annotations,
            } => {
                self.session_mut(&session_id)?.adjudicated = Some(annotations);
            }
        }
        Ok(())
    }

    fn session_mut(&mut self, id: &str) -> Result<&mut Session, String> {
        self.sessions.get_mut(id).ok_or_else(|| format!("event for unknown session {id}"))
    }
}
