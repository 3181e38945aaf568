//! Seeded synthetic corpus generator with planted dataset-mention patterns.
//!
//! Sentences are built from a small closed background vocabulary plus an
//! open class of capitalized names. Mentions follow two shapes: a name run
//! ending in a type word ("the Halvern Survey") and a parenthesized
//! abbreviation ("( HAL )"). Parenthesized years are planted as negatives
//! so the abbreviation pattern cannot be learned from context alone.
//!
//! Two disjoint name inventories are provided so a held-out set can probe
//! whether the character encoder carries names never seen in training.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Sentence, Tag};

/// Which name inventory to draw mentions from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamePool {
    Train,
    Heldout,
}

const TRAIN_NAMES: &[&str] = &[
    "Halvern", "Mortan", "Brell", "Quindar", "Sovet", "Ardenne", "Felmore", "Tarsin", "Veldra",
    "Osmund", "Rintal", "Caldus", "Merrow", "Delphin", "Gorvan", "Lestra", "Norwick", "Pellam",
];

const HELDOUT_NAMES: &[&str] = &[
    "Ulverin", "Womack", "Xandor", "Yelvert", "Zorath", "Kimber", "Jorwin", "Ivanore", "Hestley",
    "Grandel",
];

const TYPE_WORDS: &[&str] = &["Survey", "Study", "Panel"];

const BACKGROUND: &[&str] = &[
    "we", "use", "data", "from", "the", "in", "of", "for", "and", "that", "with", "analysis",
    "results", "show", "respondents", "collected", "between", "years", "model", "income",
    "education", "health", "rates", "sample", "report", "annual", "trends", "measured",
    "estimates", "across", "cohort", "based", "on", "this", "were", "changes", "observed",
    "over", "time", "adults", ",", ".",
];

fn abbreviation(name: &str) -> String {
    name.chars().take(3).collect::<String>().to_uppercase()
}

fn filler(rng: &mut ChaCha8Rng, min: usize, max: usize, out: &mut Vec<(String, Tag)>) {
    let n = rng.random_range(min..=max);
    for _ in 0..n {
        let w = *BACKGROUND.choose(rng).expect("non-empty");
        out.push((w.to_string(), Tag::Outside));
    }
}

fn mention(rng: &mut ChaCha8Rng, names: &[&str], out: &mut Vec<(String, Tag)>) {
    out.push(("the".to_string(), Tag::Outside));
    let run = if rng.random_range(0..3) == 0 { 2 } else { 1 };
    for k in 0..run {
        let name = *names.choose(rng).expect("non-empty");
        let tag = if k == 0 { Tag::Begin } else { Tag::Inside };
        out.push((name.to_string(), tag));
    }
    let type_word = *TYPE_WORDS.choose(rng).expect("non-empty");
    out.push((type_word.to_string(), Tag::Inside));
}

fn abbreviated_mention(rng: &mut ChaCha8Rng, names: &[&str], out: &mut Vec<(String, Tag)>) {
    let name = *names.choose(rng).expect("non-empty");
    out.push(("the".to_string(), Tag::Outside));
    out.push((name.to_string(), Tag::Begin));
    let type_word = *TYPE_WORDS.choose(rng).expect("non-empty");
    out.push((type_word.to_string(), Tag::Inside));
    out.push(("(".to_string(), Tag::Outside));
    out.push((abbreviation(name), Tag::Begin));
    out.push((")".to_string(), Tag::Outside));
}

fn year_parens(rng: &mut ChaCha8Rng, out: &mut Vec<(String, Tag)>) {
    out.push(("(".to_string(), Tag::Outside));
    out.push((rng.random_range(1970..2016).to_string(), Tag::Outside));
    out.push((")".to_string(), Tag::Outside));
}

fn bare_name(rng: &mut ChaCha8Rng, names: &[&str], out: &mut Vec<(String, Tag)>) {
    // A capitalized name outside any mention context, tagged O: shape alone
    // must not be sufficient for a positive.
    let name = *names.choose(rng).expect("non-empty");
    out.push((name.to_string(), Tag::Outside));
    out.push(("and".to_string(), Tag::Outside));
    out.push(("colleagues".to_string(), Tag::Outside));
}

/// Generates `count` sentences from the given name pool, deterministically
/// for a given seed.
pub fn generate(count: usize, pool: NamePool, seed: u64) -> Vec<Sentence> {
    let names = match pool {
        NamePool::Train => TRAIN_NAMES,
        NamePool::Heldout => HELDOUT_NAMES,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sentences = Vec::with_capacity(count);
    for i in 0..count {
        let mut parts: Vec<(String, Tag)> = Vec::new();
        filler(&mut rng, 2, 4, &mut parts);
        match i % 10 {
            0..=3 => mention(&mut rng, names, &mut parts),
            4..=6 => abbreviated_mention(&mut rng, names, &mut parts),
            7 => year_parens(&mut rng, &mut parts),
            8 => bare_name(&mut rng, names, &mut parts),
            _ => {}
        }
        filler(&mut rng, 1, 3, &mut parts);
        let (tokens, tags) = parts.into_iter().unzip();
        sentences.push(Sentence::new(tokens, tags).expect("generator emits valid sentences"));
    }
    sentences
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(
            generate(50, NamePool::Train, 9),
            generate(50, NamePool::Train, 9)
        );
    }

    #[test]
    fn name_pools_are_disjoint() {
        let train: HashSet<&str> = TRAIN_NAMES.iter().copied().collect();
        for name in HELDOUT_NAMES {
            assert!(!train.contains(name));
        }
        let train_abbr: HashSet<String> = TRAIN_NAMES.iter().map(|n| abbreviation(n)).collect();
        for name in HELDOUT_NAMES {
            assert!(!train_abbr.contains(&abbreviation(name)));
        }
    }

    #[test]
    fn heldout_tokens_never_use_train_names() {
        let train: HashSet<&str> = TRAIN_NAMES.iter().copied().collect();
        for sentence in generate(100, NamePool::Heldout, 3) {
            for token in sentence.tokens() {
                assert!(!train.contains(token.as_str()), "leaked {token}");
            }
        }
    }

    #[test]
    fn corpus_contains_mentions_and_negatives() {
        let sentences = generate(200, NamePool::Train, 42);
        let with_mentions = sentences.iter().filter(|s| !s.spans().is_empty()).count();
        assert!(with_mentions > 100, "only {with_mentions} mention sentences");
        assert!(with_mentions < 200, "no negative sentences");
        // Every sentence IOB-valid by construction.
        for s in &sentences {
            let mut tags = s.tags().to_vec();
            assert_eq!(crate::corpus::repair_iob(&mut tags), 0);
        }
    }
}
