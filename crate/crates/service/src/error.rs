use engage_core::codebook::Violation;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown corpus {0:?}")]
    UnknownCorpus(String),
    #[error("corpus {0:?} already exists with different content")]
    CorpusConflict(String),
    #[error("corpus is invalid: {0}")]
    InvalidCorpus(String),
    #[error("no filtered set {list_name:?} with config hash {config_hash:?} for corpus {corpus_id:?}")]
    UnknownFilteredSet {
        corpus_id: String,
        list_name: String,
        config_hash: String,
    },
    #[error("filtered set does not fit its corpus: {0}")]
    InvalidFilteredSet(String),
    #[error("roster is empty")]
    EmptyRoster,
    #[error("roster lists coder {0:?} twice")]
    DuplicateCoder(String),
    #[error("double coding needs at least two coders")]
    DoubleNeedsTwo,
    #[error("reliability percent must be in 1..=100, got {0}")]
    InvalidPercent(u8),
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("coder {coder:?} is not on the roster of session {session:?}")]
    UnknownCoder { session: String, coder: String },
    #[error("item {item:?} is not in the queue of coder {coder:?}")]
    UnknownItem { coder: String, item: String },
    #[error("session {0:?} is closed")]
    SessionClosed(String),
    #[error("annotation failed validation")]
    ValidationFailed(Vec<Violation>),
    #[error("coder {coder:?} holds no live lease on item {item:?}")]
    LeaseLost { coder: String, item: String },
    #[error("item {item:?} was already coded by {coder:?} with a different decision")]
    DuplicateSubmission {
        coder: String,
        item: String,
        annotation_id: String,
    },
    #[error("session {0:?} is not double coded")]
    NotDoubleCoded(String),
    #[error("no unit has been coded by both reliability coders yet")]
    NoUnits,
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("no route for {0}")]
    NoRoute(String),
    #[error("missing or wrong access token")]
    Unauthorized,
    #[error("storage failure: {0}")]
    Storage(String),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownCorpus(_) => "UnknownCorpus",
            ServiceError::CorpusConflict(_) => "CorpusConflict",
            ServiceError::InvalidCorpus(_) => "InvalidCorpus",
            ServiceError::UnknownFilteredSet { .. } => "UnknownFilteredSet",
            ServiceError::InvalidFilteredSet(_) => "InvalidFilteredSet",
            ServiceError::EmptyRoster => "EmptyRoster",
            ServiceError::DuplicateCoder(_) => "DuplicateCoder",
            ServiceError::DoubleNeedsTwo => "DoubleNeedsTwo",
            ServiceError::InvalidPercent(_) => "InvalidPercent",
            ServiceError::UnknownSession(_) => "UnknownSession",
            ServiceError::UnknownCoder { .. } => "UnknownCoder",
            ServiceError::UnknownItem { .. } => "UnknownItem",
            ServiceError::SessionClosed(_) => "SessionClosed",
            ServiceError::ValidationFailed(_) => "ValidationFailed",
            ServiceError::LeaseLost { .. } => "LeaseLost",
            ServiceError::DuplicateSubmission { .. } => "DuplicateSubmission",
            ServiceError::NotDoubleCoded(_) => "NotDoubleCoded",
            ServiceError::NoUnits => "NoUnits",
            ServiceError::BadRequest(_) => "BadRequest",
            ServiceError::NoRoute(_) => "NoRoute",
            ServiceError::Unauthorized => "Unauthorized",
            ServiceError::Storage(_) => "Storage",
        }
    }

    /// HTTP status for the error.
    pub fn status(&self) -> u16 {
        match self {
            ServiceError::UnknownCorpus(_)
            | ServiceError::UnknownFilteredSet { .. }
            | ServiceError::UnknownSession(_)
            | ServiceError::UnknownCoder { .. }
            | ServiceError::UnknownItem { .. }
            | ServiceError::NoRoute(_) => 404,
            ServiceError::CorpusConflict(_)
            | ServiceError::SessionClosed(_)
            | ServiceError::LeaseLost { .. }
            | ServiceError::DuplicateSubmission { .. }
            | ServiceError::NotDoubleCoded(_)
            | ServiceError::NoUnits => 409,
            ServiceError::InvalidCorpus(_)
            | ServiceError::InvalidFilteredSet(_)
            | ServiceError::EmptyRoster
            | ServiceError::DuplicateCoder(_)
            | ServiceError::DoubleNeedsTwo
            | ServiceError::InvalidPercent(_)
            | ServiceError::ValidationFailed(_) => 422,
            ServiceError::BadRequest(_) => 400,
            ServiceError::Unauthorized => 401,
            ServiceError::Storage(_) => 500,
        }
    }

    pub fn details(&self) -> Value {
        match self {
            ServiceError::ValidationFailed(v) => json!({ "violations": v }),
            ServiceError::DuplicateSubmission { annotation_id, .. } => json!({ "annotation_id": annotation_id }),
            ServiceError::UnknownFilteredSet {
                corpus_id,
                list_name,
                config_hash,
            } => json!({ "corpus_id": corpus_id, "list_name": list_name, "config_hash": config_hash }),
            _ => Value::Null,
        }
    }

    pub fn body(&self) -> Value {
        json!({ "code": self.code(), "message": self.to_string(), "details": self.details() })
    }
}

impl From<std::io::Error> for ServiceError {
    fn from(e: std::io::Error) -> Self {
        ServiceError::Storage(e.to_string())
    }
}
