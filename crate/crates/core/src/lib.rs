//! Finding engaging messages in lesson transcripts.
//!
//! The pipeline runs in stages: ingest and normalize transcripts
//! ([`corpus`], [`normalize`]), learn message-indicative words from a gold
//! annotation set ([`keyness`]), shrink the corpus to keyword neighbourhoods
//! ([`filtering`]), pick the smallest list that keeps every gold message
//! ([`selection`]), and then measure coder agreement ([`reliability`]) and
//! describe the coded messages ([`analytics`]). [`synth`] builds corpora with
//! known answers for testing the selection stage.
//!
//! Reports that carry fractions are generic over [`Scalar`]. The aliases at
//! the bottom of this file fix the common choices.

pub mod analytics;
pub mod codebook;
pub mod corpus;
pub mod filtering;
pub mod keyness;
pub mod normalize;
pub mod provenance;
pub mod reliability;
pub mod scalar;
pub mod selection;
pub mod synth;

pub use codebook::{Appeal, Category, Decision, Frame, MessageAnnotation, Span};
pub use corpus::{Corpus, Grade, GroupRegistry, Segment, Transcript, Trimester};
pub use keyness::KeywordList;
pub use normalize::{normalize, NormalizationConfig};
pub use scalar::Scalar;

/// Exact fraction used where rounding would hide a violated identity.
pub type Rational = num_rational::Ratio<i64>;

pub type ReductionReport = filtering::ReductionReport<f64>;
pub type ExactReductionReport = filtering::ReductionReport<Rational>;
pub type RecallReport = filtering::RecallReport<f64>;
pub type ExactRecallReport = filtering::RecallReport<Rational>;
pub type EvaluationTable = selection::EvaluationTable<f64>;
pub type Selection = selection::Selection<f64>;
pub type AgreementReport = reliability::AgreementReport<f64>;
pub type RatioTable = analytics::RatioTable<f64>;
pub type ExactRatioTable = analytics::RatioTable<Rational>;
pub type PercentTable = analytics::PercentTable<f64>;
pub type ExactPercentTable = analytics::PercentTable<Rational>;
pub type CorpusStats = corpus::CorpusStats<f64>;
pub type KeywordScore = keyness::KeywordScore<f64>;
