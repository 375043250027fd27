use rand::seq::SliceRandom;
use rand::Rng;

use engage_core::codebook::{Category, Decision, MessageAnnotation, Span};
use engage_core::corpus::{default_group_registry, Corpus, Transcript};
use engage_core::keyness::KeywordList;
use engage_core::normalize::{token_count, NormalizationConfig};

use crate::fixtures::{annotation, segment, transcript};

/// Small closed vocabulary so that random lists and segments overlap often.
pub const VOCABULARY: [&str; 16] = [
    "tarea", "examen", "nota", "premio", "futuro", "aprender", "divertido", "orgullo", "castigo", "trabajo",
    "pizarra", "mesa", "lunes", "ventana", "papel", "reloj",
];

pub fn random_text<R: Rng>(rng: &mut R, max_words: usize) -> String {
    let n = rng.gen_range(0..=max_words);
    let words: Vec<&str> = (0..n).map(|_| *VOCABULARY.choose(rng).expect("nonempty")).collect();
    let mut text = words.join(" ");
    if !text.is_empty() && rng.gen_bool(0.5) {
        text.push('.');
    }
    text
}

pub fn random_transcript<R: Rng>(rng: &mut R, id: &str, max_segments: usize) -> Transcript {
    let config = NormalizationConfig::default();
    let n = rng.gen_range(1..=max_segments);
    let segments = (0..n)
        .map(|i| {
            let text = random_text(rng, 6);
            let tokens = token_count(&text, &config);
            segment(i, text, tokens)
        })
        .collect();
    transcript(id, rng.gen_range(9..=12), rng.gen_range(1..=3), segments)
}

pub fn random_corpus<R: Rng>(rng: &mut R, max_transcripts: usize, max_segments: usize) -> Corpus {
    let n = rng.gen_range(1..=max_transcripts);
    let transcripts = (0..n).map(|i| random_transcript(rng, &format!("t{i}"), max_segments)).collect();
    Corpus::new(transcripts, default_group_registry()).expect("random corpus is valid")
}

/// A random nonempty keyword list drawn from [`VOCABULARY`].
pub fn random_list<R: Rng>(rng: &mut R, name: &str) -> KeywordList {
    let k = rng.gen_range(1..=VOCABULARY.len());
    let words = VOCABULARY.choose_multiple(rng, k).map(|w| w.to_string()).collect();
    KeywordList::new(name, words).expect("distinct words")
}

/// Gold messages on random short spans whose segments contain at least one
/// token, so that the gold-union list can reach them.
pub fn random_gold<R: Rng>(rng: &mut R, corpus: &Corpus, rate: f64) -> Vec<MessageAnnotation> {
    let mut gold = Vec::new();
    for t in &corpus.transcripts {
        let mut i = 0;
        while i < t.segments.len() {
            if t.segments[i].token_count > 0 && rng.gen_bool(rate) {
                let end = (i + rng.gen_range(0..=2)).min(t.segments.len() - 1);
                let c = Category::from_ordinal(rng.gen_range(0..Category::COUNT)).expect("ordinal < 8");
                let id = format!("g{}", gold.len());
                gold.push(annotation(&id, "gold", &t.id, Span::new(i, end), Decision::Message(c)));
                i = end + 1;
            } else {
                i += 1;
            }
        }
    }
    gold
}

/// A random coder's annotations on each transcript: non-overlapping spans
/// with random decisions.
pub fn random_coder<R: Rng>(rng: &mut R, coder: &str, transcripts: &[&str], length: usize) -> Vec<MessageAnnotation> {
    let mut out = Vec::new();
    for t in transcripts {
        let mut i = rng.gen_range(0..3);
        while i < length {
            let end = (i + rng.gen_range(0..=3)).min(length - 1);
            let decision = if rng.gen_bool(0.15) {
                Decision::NotAMessage
            } else {
                Decision::Message(Category::from_ordinal(rng.gen_range(0..3)).expect("ordinal < 8"))
            };
            out.push(annotation(&format!("{coder}-{}", out.len()), coder, t, Span::new(i, end), decision));
            i = end + 1 + rng.gen_range(0..4);
        }
    }
    out
}
