use std::collections::HashSet;

use engage_core::corpus::Transcript;
use engage_core::filtering::{filter_corpus, filter_transcript, gold_union_list, recall_report};
use engage_core::keyness::KeywordList;
use engage_core::normalize::{normalize, NormalizationConfig};
use engage_core::Rational;
use engage_testkit::oracles::brute_retained;
use engage_testkit::random::{random_corpus, random_gold, random_list, random_transcript};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn retained_only(t: &Transcript, retained: impl IntoIterator<Item = usize>) -> Transcript {
    let mut out = t.clone();
    out.segments = retained
        .into_iter()
        .enumerate()
        .map(|(new, old)| {
            let mut s = t.segments[old].clone();
            s.index = new;
            s
        })
        .collect();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn matches_brute_force(seed in any::<u64>(), window in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let config = NormalizationConfig::default();
        let t = random_transcript(&mut rng, "t", 30);
        let list = random_list(&mut rng, "l");
        let f = filter_transcript(&t, &list, window, &config).unwrap();
        let tokens: Vec<Vec<String>> = t.segments.iter().map(|s| normalize(&s.text, &config)).collect();
        let words: HashSet<String> = list.keywords().iter().cloned().collect();
        prop_assert_eq!(&f.retained, &brute_retained(&tokens, &words, window));
        for i in f.matches.keys() {
            prop_assert!(f.retained.contains(i));
        }
    }

    #[test]
    fn superset_list_retains_superset(seed in any::<u64>(), window in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let config = NormalizationConfig::default();
        let t = random_transcript(&mut rng, "t", 30);
        let small = random_list(&mut rng, "a");
        let mut words = small.keywords().to_vec();
        for w in engage_testkit::random::VOCABULARY {
            if !words.iter().any(|x| x == w) && rng.gen_bool(0.4) {
                words.push(w.to_string());
            }
        }
        words.shuffle(&mut rng);
        let big = KeywordList::new("b", words).unwrap();
        let a = filter_transcript(&t, &small, window, &config).unwrap();
        let b = filter_transcript(&t, &big, window, &config).unwrap();
        prop_assert!(a.retained.is_subset(&b.retained));
    }

    #[test]
    fn refiltering_with_zero_window_keeps_only_matches(seed in any::<u64>(), window in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let config = NormalizationConfig::default();
        let t = random_transcript(&mut rng, "t", 30);
        let list = random_list(&mut rng, "l");
        let first = filter_transcript(&t, &list, window, &config).unwrap();
        let reduced = retained_only(&t, first.retained.iter().copied());
        let again = filter_transcript(&reduced, &list, 0, &config).unwrap();
        let matched_positions: Vec<usize> = first
            .retained
            .iter()
            .enumerate()
            .filter(|(_, old)| first.matches.contains_key(old))
            .map(|(new, _)| new)
            .collect();
        prop_assert_eq!(again.retained.iter().copied().collect::<Vec<_>>(), matched_positions);

        // Zero-window output filtered again is a fixed point.
        let zero = filter_transcript(&t, &list, 0, &config).unwrap();
        let reduced = retained_only(&t, zero.retained.iter().copied());
        let again = filter_transcript(&reduced, &list, 0, &config).unwrap();
        prop_assert_eq!(again.retained.len(), reduced.segments.len());
    }

    #[test]
    fn wider_window_retains_more(seed in any::<u64>(), window in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let config = NormalizationConfig::default();
        let t = random_transcript(&mut rng, "t", 30);
        let list = random_list(&mut rng, "l");
        let narrow = filter_transcript(&t, &list, window, &config).unwrap();
        let wide = filter_transcript(&t, &list, window + 1, &config).unwrap();
        prop_assert!(narrow.retained.is_subset(&wide.retained));
    }

    #[test]
    fn gold_union_list_reaches_every_message(seed in any::<u64>(), window in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let config = NormalizationConfig::default();
        let corpus = random_corpus(&mut rng, 5, 25);
        let gold = random_gold(&mut rng, &corpus, 0.2);
        prop_assume!(!gold.is_empty());
        let list = gold_union_list(&corpus, &gold, &config).unwrap();
        let filtered = filter_corpus(&corpus, &list, window, &config).unwrap();
        let report = recall_report::<Rational>(&corpus, &filtered, &gold).unwrap();
        prop_assert_eq!(report.recall, Rational::from_integer(1));
        prop_assert!(report.missed.is_empty());
    }
}
