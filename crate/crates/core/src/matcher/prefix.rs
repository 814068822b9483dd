//! Smallest distinguishable prefixes.
//!
//! Each vocabulary word is shortened to the shortest prefix (at least three
//! characters) that no word of another concept family starts with. A phrase
//! becomes a candidate for a sentence only when every one of its prefixes
//! starts some sentence token.

use std::collections::{BTreeMap, BTreeSet};

pub const MIN_PREFIX_CHARS: usize = 3;

/// Shortest prefix of `word` with at least [`MIN_PREFIX_CHARS`] characters
/// that no word of a different family in `word_map` starts with. Words that
/// are too short, or that collide at every length, are returned whole.
pub fn smallest_prefix<F: PartialEq>(word: &str, family: &F, word_map: &[(String, F)]) -> String {
    shortest_unshared(word, |p| word_map.iter().any(|(w, f)| f != family && w.starts_with(p)))
}

fn shortest_unshared(word: &str, mut shared: impl FnMut(&str) -> bool) -> String {
    let ends: Vec<usize> = word
        .char_indices()
        .map(|(i, _)| i)
        .skip(1)
        .chain(std::iter::once(word.len()))
        .collect();
    if ends.len() < MIN_PREFIX_CHARS {
        return word.to_owned();
    }
    for &end in &ends[MIN_PREFIX_CHARS - 1..] {
        let p = &word[..end];
        if !shared(p) {
            return p.to_owned();
        }
    }
    word.to_owned()
}

/// Sorted word → families table for repeated prefix queries.
pub(crate) struct WordMap<F: Ord> {
    words: BTreeMap<String, BTreeSet<F>>,
}

impl<F: Ord + Clone> WordMap<F> {
    pub(crate) fn new<'a>(pairs: impl IntoIterator<Item = (&'a str, F)>) -> Self {
        let mut words: BTreeMap<String, BTreeSet<F>> = BTreeMap::new();
        for (w, f) in pairs {
            words.entry(w.to_owned()).or_default().insert(f);
        }
        WordMap { words }
    }

    pub(crate) fn smallest_prefix(&self, word: &str, family: &F) -> String {
        shortest_unshared(word, |p| {
            self.words
                .range::<str, _>((std::ops::Bound::Included(p), std::ops::Bound::Unbounded))
                .take_while(|(w, _)| w.starts_with(p))
                .any(|(_, fams)| fams.iter().any(|f| f != family))
        })
    }
}
