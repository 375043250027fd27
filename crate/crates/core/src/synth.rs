//! Seeded generator of labelled lesson corpora.
//!
//! Real classroom transcripts are private, so this generator is the
//! calibration instrument for the whole pipeline. It plants "messages" into
//! background talk with a known ground truth:
//!
//! * Background segments draw tokens from a Zipf-like background vocabulary.
//!   Each background token is replaced by a message-vocabulary token with
//!   probability `leak_probability`, so message words are rare but not absent
//!   outside messages.
//! * Each segment not already inside a message starts a planted message with
//!   probability `message_rate`. The message covers 1..=`max_message_segments`
//!   segments.
//! * Every segment of a planted message contains at least one message token;
//!   every other position is a message token with probability
//!   `injection_probability`.
//!
//! The discriminative token set is exactly the message vocabulary, returned in
//! generator weight order (most frequent first).

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codebook::{Category, Decision, MessageAnnotation, Span};
use crate::corpus::{default_group_registry, Corpus, Grade, Segment, Transcript, Trimester};
use crate::normalize::{token_count, NormalizationConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisParams {
    pub seed: u64,
    pub transcript_count: usize,
    pub segments_per_transcript: usize,
    pub background_vocabulary: usize,
    pub message_vocabulary: usize,
    pub message_rate: f64,
    pub injection_probability: f64,
    pub leak_probability: f64,
    pub min_tokens_per_segment: usize,
    pub max_tokens_per_segment: usize,
    pub max_message_segments: usize,
}

impl Default for SynthesisParams {
    fn default() -> Self {
        SynthesisParams {
            seed: 7,
            transcript_count: 48,
            segments_per_transcript: 125,
            background_vocabulary: 4000,
            message_vocabulary: 100,
            message_rate: 0.04,
            injection_probability: 0.4,
            leak_probability: 0.002,
            min_tokens_per_segment: 6,
            max_tokens_per_segment: 14,
            max_message_segments: 2,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthesisError {
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
}

impl SynthesisParams {
    pub fn validate(&self) -> Result<(), SynthesisError> {
        for (name, v) in [
            ("transcript_count", self.transcript_count),
            ("segments_per_transcript", self.segments_per_transcript),
            ("background_vocabulary", self.background_vocabulary),
            ("message_vocabulary", self.message_vocabulary),
            ("min_tokens_per_segment", self.min_tokens_per_segment),
            ("max_message_segments", self.max_message_segments),
        ] {
            if v == 0 {
                return Err(SynthesisError::NotPositive(name));
            }
        }
        if self.max_tokens_per_segment < self.min_tokens_per_segment {
            return Err(SynthesisError::OutOfRange {
                name: "max_tokens_per_segment",
                value: self.max_tokens_per_segment as f64,
                range: "[min_tokens_per_segment, inf)",
            });
        }
        let checks = [
            ("message_rate", self.message_rate, self.message_rate > 0.0 && self.message_rate < 1.0, "(0, 1)"),
            (
                "injection_probability",
                self.injection_probability,
                self.injection_probability > 0.0 && self.injection_probability <= 1.0,
                "(0, 1]",
            ),
            (
                "leak_probability",
                self.leak_probability,
                (0.0..1.0).contains(&self.leak_probability),
                "[0, 1)",
            ),
        ];
        for (name, value, ok, range) in checks {
            if !ok {
                return Err(SynthesisError::OutOfRange { name, value, range });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub gold: Vec<MessageAnnotation>,
    /// Message vocabulary, most heavily weighted first.
    pub discriminative_tokens: Vec<String>,
    pub background_tokens: Vec<String>,
}

const CONSONANTS: &[u8] = b"bcdfglmnprstv";
const VOWELS: &[u8] = b"aeiou";

/// Distinct pronounceable pseudo-word for every index (two or more
/// consonant-vowel syllables).
fn pseudo_word(index: usize) -> String {
    let base = CONSONANTS.len() * VOWELS.len();
    let mut n = index + base;
    let mut syllables = Vec::new();
    while n > 0 {
        let s = n % base;
        syllables.push([CONSONANTS[s / VOWELS.len()], VOWELS[s % VOWELS.len()]]);
        n /= base;
    }
    syllables.reverse();
    syllables.into_iter().flatten().map(char::from).collect()
}

fn zipf_weights(n: usize, exponent: f64) -> Vec<f64> {
    (1..=n).map(|r| 1.0 / (r as f64).powf(exponent)).collect()
}

fn render_sentence(tokens: &[&str], rng: &mut ChaCha8Rng) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i == 0 {
            let mut chars = t.chars();
            if let Some(c) = chars.next() {
                out.extend(c.to_uppercase());
                out.push_str(chars.as_str());
            }
        } else {
            if rng.gen_bool(0.08) {
                out.push(',');
            }
            out.push(' ');
            out.push_str(t);
        }
    }
    out.push(if rng.gen_bool(0.15) { '?' } else { '.' });
    out
}

pub fn generate_synthetic_corpus(params: &SynthesisParams) -> Result<SyntheticCorpus, SynthesisError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let config = NormalizationConfig::default();

    let mut words: Vec<String> = (0..params.background_vocabulary + params.message_vocabulary)
        .map(pseudo_word)
        .collect();
    rand::seq::SliceRandom::shuffle(words.as_mut_slice(), &mut rng);
    let message_words = words.split_off(params.background_vocabulary);
    let background_words = words;

    let background_dist = WeightedIndex::new(zipf_weights(background_words.len(), 1.0)).expect("nonempty weights");
    let message_dist = WeightedIndex::new(zipf_weights(message_words.len(), 0.5)).expect("nonempty weights");

    let mut transcripts = Vec::with_capacity(params.transcript_count);
    let mut gold = Vec::new();
    for t in 0..params.transcript_count {
        let transcript_id = format!("synth-{t:04}");
        let mut segments = Vec::with_capacity(params.segments_per_transcript);
        let mut message_left = 0usize;
        for i in 0..params.segments_per_transcript {
            if message_left == 0 && rng.gen_bool(params.message_rate) {
                let len = rng
                    .gen_range(1..=params.max_message_segments)
                    .min(params.segments_per_transcript - i);
                let category = Category::from_ordinal(rng.gen_range(0..Category::COUNT)).expect("ordinal < 8");
                gold.push(MessageAnnotation {
                    id: format!("gold-{:05}", gold.len()),
                    coder_id: "synth".into(),
                    transcript_id: transcript_id.clone(),
                    span: Span::new(i, i + len - 1),
                    decision: Decision::Message(category),
                    note: None,
                    created_at: gold.len() as u64,
                });
                message_left = len;
            }
            let in_message = message_left > 0;
            message_left = message_left.saturating_sub(1);

            let n = rng.gen_range(params.min_tokens_per_segment..=params.max_tokens_per_segment);
            let forced = if in_message { Some(rng.gen_range(0..n)) } else { None };
            let tokens: Vec<&str> = (0..n)
                .map(|k| {
                    let message_token = if in_message {
                        forced == Some(k) || rng.gen_bool(params.injection_probability)
                    } else {
                        params.leak_probability > 0.0 && rng.gen_bool(params.leak_probability)
                    };
                    if message_token {
                        message_words[message_dist.sample(&mut rng)].as_str()
                    } else {
                        background_words[background_dist.sample(&mut rng)].as_str()
                    }
                })
                .collect();
            let text = render_sentence(&tokens, &mut rng);
            segments.push(Segment {
                id: format!("{transcript_id}-s{i:04}"),
                index: i,
                token_count: token_count(&text, &config),
                text,
                silence: false,
                start_ms: None,
                end_ms: None,
            });
        }
        transcripts.push(Transcript {
            id: transcript_id,
            teacher_id: format!("teacher-{:02}", t % 12),
            group_id: format!("group-{t:03}"),
            grade: Grade::ALL[t % 4],
            trimester: Trimester::ALL[(t / 4) % 3],
            academic_year: "2021-22".into(),
            segments,
        });
    }
    let corpus = Corpus::new(transcripts, default_group_registry()).expect("all grades registered");
    Ok(SyntheticCorpus {
        corpus,
        gold,
        discriminative_tokens: message_words,
        background_tokens: background_words,
    })
}

/// Share of corpus tokens that lie inside planted messages.
pub fn planted_token_share(synthetic: &SyntheticCorpus) -> f64 {
    let mut spans: BTreeMap<&str, Vec<Span>> = BTreeMap::new();
    for g in &synthetic.gold {
        spans.entry(g.transcript_id.as_str()).or_default().push(g.span);
    }
    let mut inside = 0u64;
    for t in &synthetic.corpus.transcripts {
        let s = spans.get(t.id.as_str()).map(Vec::as_slice).unwrap_or(&[]);
        inside += t
            .segments
            .iter()
            .filter(|seg| s.iter().any(|sp| sp.contains(seg.index)))
            .map(|seg| seg.token_count as u64)
            .sum::<u64>();
    }
    inside as f64 / synthetic.corpus.token_count().max(1) as f64
}
