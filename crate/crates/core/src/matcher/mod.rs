//! Vocabulary phrase detection.
//!
//! [`build_index`] turns a lexicon into a [`VocabularyIndex`] of stopword-free
//! phrases keyed by their smallest distinguishing prefixes.
//! [`detect_phrases`] prefilters phrases with [`candidate_phrases`] and then
//! aligns each candidate against the sentence with [`lcf_align`].

mod align;
mod prefix;

pub use align::{lcf_align, prefix_ratio, Alignment, MatchedPair};
pub use prefix::{smallest_prefix, MIN_PREFIX_CHARS};

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{Lexicon, ModifierCategory};
use crate::textprep::{tokenize, Sentence};

/// Alignment thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchParams {
    /// Minimum prefix ratio for a word pair to match, in (0, 1].
    pub tau: f64,
    /// Minimum fraction of phrase words matched for detection, in (0, 1].
    pub gamma: f64,
    /// Penalty per unmatched token inside the matched stretch, >= 0.
    pub delta: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("tau must be in (0, 1], got {0}")]
    Tau(f64),
    #[error("gamma must be in (0, 1], got {0}")]
    Gamma(f64),
    #[error("delta must be finite and >= 0, got {0}")]
    Delta(f64),
}

impl MatchParams {
    pub fn new(tau: f64, gamma: f64, delta: f64) -> Result<Self, ParamError> {
        let p = MatchParams { tau, gamma, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(ParamError::Tau(self.tau));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(ParamError::Gamma(self.gamma));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(ParamError::Delta(self.delta));
        }
        Ok(())
    }
}

impl Default for MatchParams {
    fn default() -> Self {
        MatchParams {
            tau: 0.5,
            gamma: 0.7,
            delta: 0.05,
        }
    }
}

/// A lexicon concept: a core finding or a modifier term, by position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConceptRef {
    Core(usize),
    Modifier(usize),
}

impl ConceptRef {
    pub fn is_core(self) -> bool {
        matches!(self, ConceptRef::Core(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhraseId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixEntry {
    pub prefix: String,
    pub word: String,
    pub family: ConceptRef,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedPhrase {
    pub id: PhraseId,
    pub concept: ConceptRef,
    /// Phrase as written in the lexicon.
    pub surface: String,
    /// Lowercased words with stopwords removed.
    pub words: Vec<String>,
    /// One required prefix per word.
    pub prefixes: Vec<String>,
}

#[derive(Debug, Error, PartialEq)]
pub enum IndexError {
    #[error("phrase '{phrase}' of {owner} is empty after stopword removal")]
    EmptyPhrase { phrase: String, owner: String },
}

#[derive(Debug, Clone)]
pub struct VocabularyIndex {
    phrases: Vec<IndexedPhrase>,
    prefix_map: HashMap<String, Vec<PrefixEntry>>,
    by_prefix: HashMap<String, Vec<PhraseId>>,
}

impl VocabularyIndex {
    pub fn phrases(&self) -> &[IndexedPhrase] {
        &self.phrases
    }

    pub fn phrase(&self, id: PhraseId) -> &IndexedPhrase {
        &self.phrases[id.0]
    }

    pub fn prefix_entries(&self, prefix: &str) -> &[PrefixEntry] {
        self.prefix_map.get(prefix).map_or(&[], Vec::as_slice)
    }

    /// Phrases of `concept`.
    pub fn phrases_of(&self, concept: ConceptRef) -> impl Iterator<Item = &IndexedPhrase> {
        self.phrases.iter().filter(move |p| p.concept == concept)
    }
}

/// Indexes every core-finding name and synonym and every modifier phrase.
pub fn build_index(lexicon: &Lexicon) -> Result<VocabularyIndex, IndexError> {
    let mut raw: Vec<(ConceptRef, String, String)> = Vec::new();
    for (i, cf) in lexicon.core_findings.iter().enumerate() {
        for p in cf.phrases() {
            raw.push((ConceptRef::Core(i), p.to_string(), cf.id.clone()));
        }
    }
    for (i, m) in lexicon.modifiers.iter().enumerate() {
        for p in m.phrases() {
            raw.push((
                ConceptRef::Modifier(i),
                p.to_string(),
                format!("{} modifier '{}'", m.category, m.phrase),
            ));
        }
    }

    let mut staged: Vec<(ConceptRef, String, Vec<String>)> = Vec::new();
    let mut seen = HashSet::new();
    for (concept, surface, owner) in raw {
        let words: Vec<String> = tokenize(&surface, 0)
            .into_iter()
            .map(|t| t.text.to_lowercase())
            .filter(|w| !lexicon.stopwords.contains(w))
            .collect();
        if words.is_empty() {
            return Err(IndexError::EmptyPhrase { phrase: surface, owner });
        }
        if seen.insert((concept, words.clone())) {
            staged.push((concept, surface, words));
        }
    }

    let word_map = prefix::WordMap::new(
        staged
            .iter()
            .flat_map(|(c, _, ws)| ws.iter().map(move |w| (w.as_str(), *c))),
    );

    let mut phrases = Vec::with_capacity(staged.len());
    let mut prefix_map: HashMap<String, Vec<PrefixEntry>> = HashMap::new();
    let mut by_prefix: HashMap<String, Vec<PhraseId>> = HashMap::new();
    for (n, (concept, surface, words)) in staged.into_iter().enumerate() {
        let id = PhraseId(n);
        let prefixes: Vec<String> = words.iter().map(|w| word_map.smallest_prefix(w, &concept)).collect();
        for (w, p) in words.iter().zip(&prefixes) {
            let entries = prefix_map.entry(p.clone()).or_default();
            let entry = PrefixEntry {
                prefix: p.clone(),
                word: w.clone(),
                family: concept,
            };
            if !entries.contains(&entry) {
                entries.push(entry);
            }
            let ids = by_prefix.entry(p.clone()).or_default();
            if ids.last() != Some(&id) {
                ids.push(id);
            }
        }
        phrases.push(IndexedPhrase {
            id,
            concept,
            surface,
            words,
            prefixes,
        });
    }
    Ok(VocabularyIndex {
        phrases,
        prefix_map,
        by_prefix,
    })
}

/// Phrases all of whose prefixes start at least one sentence token.
pub fn candidate_phrases(sentence: &Sentence, index: &VocabularyIndex) -> BTreeSet<PhraseId> {
    let tokens = sentence.folded_words();
    candidates_for_tokens(&tokens, index)
}

fn candidates_for_tokens(tokens: &[String], index: &VocabularyIndex) -> BTreeSet<PhraseId> {
    let mut present: HashSet<&str> = HashSet::new();
    let mut touched: BTreeSet<PhraseId> = BTreeSet::new();
    for t in tokens {
        let ends = t.char_indices().map(|(i, _)| i).skip(1).chain(std::iter::once(t.len()));
        for end in ends {
            if let Some((key, ids)) = index.by_prefix.get_key_value(&t[..end]) {
                present.insert(key.as_str());
                touched.extend(ids.iter().copied());
            }
        }
    }
    touched
        .into_iter()
        .filter(|id| {
            index.phrases[id.0]
                .prefixes
                .iter()
                .all(|p| present.contains(p.as_str()))
        })
        .collect()
}

/// A detected vocabulary phrase in one sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptMention {
    pub concept: ConceptRef,
    pub phrase: PhraseId,
    pub sentence_index: usize,
    pub alignment: Alignment,
    /// Matched sentence token indices, ascending.
    pub token_span: Vec<usize>,
}

impl ConceptMention {
    pub fn first_token(&self) -> usize {
        self.token_span[0]
    }

    pub fn last_token(&self) -> usize {
        *self.token_span.last().expect("mentions are nonempty")
    }

    pub fn overlaps(&self, other: &ConceptMention) -> bool {
        self.token_span.iter().any(|t| other.token_span.contains(t))
    }

    pub fn is_core(&self) -> bool {
        self.concept.is_core()
    }
}

impl fmt::Display for ConceptMention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}@{:?}", self.concept, self.token_span)
    }
}

/// Aligns every candidate phrase and keeps those with at least
/// `gamma * |phrase|` matched words. Overlapping mentions of one concept are
/// reduced to the best-scoring one; distinct concepts may share tokens.
pub fn detect_phrases(sentence: &Sentence, index: &VocabularyIndex, params: &MatchParams) -> Vec<ConceptMention> {
    let tokens = sentence.folded_words();
    let mut found: Vec<ConceptMention> = Vec::new();
    for id in candidates_for_tokens(&tokens, index) {
        let phrase = &index.phrases[id.0];
        let alignment = lcf_align(&phrase.words, &tokens, params);
        if alignment.is_empty() {
            continue;
        }
        if (alignment.len() as f64) + 1e-9 < params.gamma * phrase.words.len() as f64 {
            continue;
        }
        found.push(ConceptMention {
            concept: phrase.concept,
            phrase: id,
            sentence_index: sentence.index,
            token_span: alignment.token_positions(),
            alignment,
        });
    }

    found.sort_by(|a, b| {
        a.concept
            .cmp(&b.concept)
            .then(b.alignment.score.total_cmp(&a.alignment.score))
            .then(b.alignment.len().cmp(&a.alignment.len()))
            .then(a.phrase.cmp(&b.phrase))
    });
    let mut kept: Vec<ConceptMention> = Vec::new();
    for m in found {
        let clash = kept.iter().any(|k| k.concept == m.concept && k.overlaps(&m));
        if !clash {
            kept.push(m);
        }
    }
    kept.sort_by(|a, b| {
        a.first_token()
            .cmp(&b.first_token())
            .then(a.concept.cmp(&b.concept))
            .then(a.phrase.cmp(&b.phrase))
    });
    kept
}

/// Display name of a concept: canonical name or modifier phrase.
pub fn concept_name(lexicon: &Lexicon, concept: ConceptRef) -> String {
    match concept {
        ConceptRef::Core(i) => lexicon.core_findings[i].canonical_name.clone(),
        ConceptRef::Modifier(i) => lexicon.modifiers[i].phrase.to_string(),
    }
}

pub fn modifier_category(lexicon: &Lexicon, concept: ConceptRef) -> Option<ModifierCategory> {
    match concept {
        ConceptRef::Modifier(i) => Some(lexicon.modifiers[i].category),
        ConceptRef::Core(_) => None,
    }
}
