use std::collections::{BTreeMap, BTreeSet, HashSet};

use engage_core::codebook::MessageAnnotation;
use engage_core::corpus::Corpus;
use engage_core::normalize::{normalize, NormalizationConfig};

/// Keyness computed straight from two token streams, without any shared
/// counting code. Returns the score of every token seen on either side.
pub fn brute_keyness(message: &[String], background: &[String], alpha: f64) -> BTreeMap<String, f64> {
    let mut vocabulary: Vec<&String> = message.iter().chain(background).collect();
    vocabulary.sort();
    vocabulary.dedup();
    let v = vocabulary.len() as f64;
    let (nm, nb) = (message.len() as f64, background.len() as f64);
    vocabulary
        .into_iter()
        .map(|w| {
            let cm = message.iter().filter(|t| *t == w).count() as f64;
            let cb = background.iter().filter(|t| *t == w).count() as f64;
            let score = (cm + alpha).ln() - (nm + alpha * v).ln() - (cb + alpha).ln() + (nb + alpha * v).ln();
            (w.clone(), score)
        })
        .collect()
}

/// Splits every normalized token of `corpus` into message and background
/// streams by scanning all gold spans for each segment.
pub fn brute_token_streams(
    corpus: &Corpus,
    gold: &[MessageAnnotation],
    config: &NormalizationConfig,
) -> (Vec<String>, Vec<String>) {
    let mut message = Vec::new();
    let mut background = Vec::new();
    for t in &corpus.transcripts {
        for s in &t.segments {
            let inside = gold
                .iter()
                .any(|g| g.transcript_id == t.id && g.span.start <= s.index && s.index <= g.span.end);
            let target = if inside { &mut message } else { &mut background };
            target.extend(normalize(&s.text, config));
        }
    }
    (message, background)
}

/// Retained indices of one transcript given its per-segment token sets.
pub fn brute_retained(tokens: &[Vec<String>], list: &HashSet<String>, window: usize) -> BTreeSet<usize> {
    let n = tokens.len();
    (0..n)
        .filter(|&i| {
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(n.saturating_sub(1));
            (lo..=hi).any(|j| tokens[j].iter().any(|t| list.contains(t)))
        })
        .collect()
}

pub struct PrefixOutcome {
    pub size: usize,
    pub retained_fraction: f64,
}

/// Walks every prefix of `ranking` and returns the one with full recall and
/// the smallest token-weighted retained fraction. `None` when even the full
/// ranking misses a gold message.
pub fn best_prefix(
    corpus: &Corpus,
    gold: &[MessageAnnotation],
    ranking: &[String],
    window: usize,
    config: &NormalizationConfig,
) -> Option<PrefixOutcome> {
    let tokens: Vec<Vec<Vec<String>>> = corpus
        .transcripts
        .iter()
        .map(|t| t.segments.iter().map(|s| normalize(&s.text, config)).collect())
        .collect();
    let total: u64 = corpus.transcripts.iter().flat_map(|t| &t.segments).map(|s| s.token_count as u64).sum();
    let mut best: Option<PrefixOutcome> = None;
    let mut list = HashSet::new();
    for (k, word) in ranking.iter().enumerate() {
        list.insert(word.clone());
        let retained: Vec<BTreeSet<usize>> = tokens.iter().map(|t| brute_retained(t, &list, window)).collect();
        let recall_ok = gold.iter().all(|g| {
            let ti = corpus.transcripts.iter().position(|t| t.id == g.transcript_id).expect("gold transcript exists");
            (g.span.start..=g.span.end).any(|i| retained[ti].contains(&i))
        });
        if !recall_ok {
            continue;
        }
        let kept: u64 = corpus
            .transcripts
            .iter()
            .zip(&retained)
            .flat_map(|(t, r)| r.iter().map(move |&i| t.segments[i].token_count as u64))
            .sum();
        let fraction = kept as f64 / total as f64;
        if best.as_ref().is_none_or(|b| fraction < b.retained_fraction) {
            best = Some(PrefixOutcome {
                size: k + 1,
                retained_fraction: fraction,
            });
        }
    }
    best
}

/// Maximum-cardinality one-to-one matching on a small bipartite graph,
/// found by trying every assignment. Ties on cardinality go to the larger
/// total weight. `weights[i][j]` is `None` where no edge exists.
pub fn exhaustive_matching(weights: &[Vec<Option<f64>>]) -> (usize, f64) {
    fn go(i: usize, weights: &[Vec<Option<f64>>], used: &mut Vec<bool>) -> (usize, f64) {
        if i == weights.len() {
            return (0, 0.0);
        }
        let mut best = go(i + 1, weights, used);
        for j in 0..used.len() {
            if let (false, Some(w)) = (used[j], weights[i][j]) {
                used[j] = true;
                let (c, t) = go(i + 1, weights, used);
                used[j] = false;
                let cand = (c + 1, t + w);
                if cand.0 > best.0 || (cand.0 == best.0 && cand.1 > best.1) {
                    best = cand;
                }
            }
        }
        best
    }
    let width = weights.first().map_or(0, Vec::len);
    go(0, weights, &mut vec![false; width])
}

/// Two-sided interval for a binomial count from the normal approximation
/// with continuity correction. Adequate when `n·p·(1-p)` is well above 10.
pub fn binomial_interval(n: u64, p: f64, z: f64) -> (u64, u64) {
    let mean = n as f64 * p;
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    let lo = (mean - z * sd - 0.5).floor().max(0.0) as u64;
    let hi = (mean + z * sd + 0.5).ceil() as u64;
    (lo, hi)
}
