//! Polarity of core-finding mentions.
//!
//! Parse-based scope: cue tokens seed a set, which climbs from each cue to its
//! governor and then spreads down object, complement and modifier edges until
//! it stops growing. Any mention touching the set is negative.
//!
//! Vocabulary rules back up the parse: a "prior" phrase (e.g. `no evidence
//! of`) before the mention in its group or the helper groups leading into it,
//! or a "post" phrase (e.g. `has resolved`) after it, also negates. Without a
//! parse the same rules run over a token window, with cues acting as prior
//! phrases.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::lexicon::Phrase;
use crate::matcher::ConceptMention;
use crate::parsegraph::{ParseNode, PhrasalGroup, RelationSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Yes,
    No,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Yes => "yes",
            Polarity::No => "no",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "yes" => Some(Polarity::Yes),
            "no" => Some(Polarity::No),
            _ => None,
        }
    }
}

impl std::fmt::Display for Polarity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const DEFAULT_CUES: &[&str] = &["no", "not", "without", "absent", "negative", "denies", "free"];
pub const DEFAULT_PRIOR: &[&str] = &["no evidence of", "without evidence of", "rule out", "resolution of"];
pub const DEFAULT_POST: &[&str] = &["not seen", "has resolved", "is excluded"];

/// Relations followed downward from scope members.
pub fn default_scope_relations() -> RelationSet {
    RelationSet::new([
        "neg", "obj", "dobj", "pobj", "iobj", "xcomp", "ccomp", "nmod", "amod", "acl", "conj",
    ])
}

/// Relations through which a cue climbs to its governor. `det` and `case`
/// cover parsers that attach "no" and "without" that way.
pub fn default_cue_relations() -> RelationSet {
    RelationSet::new(["neg", "det", "case", "advmod"])
}

/// A contiguous occurrence `[start, end)` of a vocabulary phrase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhraseHit {
    pub start: usize,
    pub end: usize,
}

impl PhraseHit {
    pub fn last(&self) -> usize {
        self.end - 1
    }
}

/// Every case-folded occurrence of any of `phrases` in `words`.
pub fn find_phrases<S: AsRef<str>>(words: &[S], phrases: &[Phrase]) -> Vec<PhraseHit> {
    let folded: Vec<String> = words.iter().map(|w| w.as_ref().to_lowercase()).collect();
    let mut hits = BTreeSet::new();
    for p in phrases {
        let pw = p.folded();
        if pw.is_empty() || pw.len() > folded.len() {
            continue;
        }
        for start in 0..=folded.len() - pw.len() {
            if folded[start..start + pw.len()] == pw[..] {
                hits.insert(PhraseHit {
                    start,
                    end: start + pw.len(),
                });
            }
        }
    }
    hits.into_iter().collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegationScope {
    pub scoped_tokens: BTreeSet<usize>,
    pub seed_cues: BTreeSet<usize>,
    /// Scope reached from each seed alone, for double-negation checks.
    pub per_seed: BTreeMap<usize, BTreeSet<usize>>,
}

impl NegationScope {
    pub fn contains_any(&self, span: &[usize]) -> bool {
        span.iter().any(|t| self.scoped_tokens.contains(t))
    }

    /// Seeds whose own scope covers part of `span`.
    pub fn seeds_covering(&self, span: &[usize]) -> Vec<usize> {
        self.per_seed
            .iter()
            .filter(|(_, s)| span.iter().any(|t| s.contains(t)))
            .map(|(&c, _)| c)
            .collect()
    }
}

/// One expansion step. Seeds whose relation is in `cue_relations` add their
/// governor; every member adds dependents attached through `scope_relations`.
pub fn expand_once(
    nodes: &[ParseNode],
    current: &BTreeSet<usize>,
    seeds: &BTreeSet<usize>,
    scope_relations: &RelationSet,
    cue_relations: &RelationSet,
) -> BTreeSet<usize> {
    let mut next = current.clone();
    for &s in seeds {
        let n = &nodes[s];
        if let Some(h) = n.head_token() {
            if cue_relations.contains(&n.relation) || scope_relations.contains(&n.relation) {
                next.insert(h);
            }
        }
    }
    for n in nodes {
        if let Some(h) = n.head_token() {
            if current.contains(&h) && scope_relations.contains(&n.relation) {
                next.insert(n.token());
            }
        }
    }
    next
}

fn closure(
    nodes: &[ParseNode],
    seeds: &BTreeSet<usize>,
    scope_relations: &RelationSet,
    cue_relations: &RelationSet,
) -> BTreeSet<usize> {
    let mut s = seeds.clone();
    loop {
        let next = expand_once(nodes, &s, seeds, scope_relations, cue_relations);
        if next.len() == s.len() {
            return s;
        }
        s = next;
    }
}

/// Fixpoint scope of every cue occurrence in the parsed sentence.
pub fn negation_scope(
    nodes: &[ParseNode],
    cues: &[Phrase],
    scope_relations: &RelationSet,
    cue_relations: &RelationSet,
) -> NegationScope {
    let forms: Vec<&str> = nodes.iter().map(|n| n.form.as_str()).collect();
    let seed_cues: BTreeSet<usize> = find_phrases(&forms, cues)
        .into_iter()
        .flat_map(|h| h.start..h.end)
        .collect();
    let per_seed: BTreeMap<usize, BTreeSet<usize>> = seed_cues
        .iter()
        .map(|&c| (c, closure(nodes, &BTreeSet::from([c]), scope_relations, cue_relations)))
        .collect();
    let scoped_tokens = closure(nodes, &seed_cues, scope_relations, cue_relations);
    NegationScope {
        scoped_tokens,
        seed_cues,
        per_seed,
    }
}

/// Where vocabulary phrases must sit relative to a mention.
#[derive(Debug, Clone, Copy)]
pub enum Containment<'a> {
    Groups(&'a [PhrasalGroup]),
    /// Phrases must end (prior) or start (post) within this many tokens.
    Window(usize),
}

/// Prior and post phrase occurrences in one sentence.
#[derive(Debug, Clone, Default)]
pub struct VocabularyHits {
    pub prior: Vec<PhraseHit>,
    pub post: Vec<PhraseHit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegationDecision {
    pub polarity: Polarity,
    pub by_scope: bool,
    pub by_prior: bool,
    pub by_post: bool,
    /// Two cues negate the mention, or the negating cue is itself negated.
    /// Reported as NO all the same.
    pub double_negation: bool,
}

pub fn polarity(
    mention: &ConceptMention,
    scope: &NegationScope,
    containment: Containment<'_>,
    hits: &VocabularyHits,
) -> NegationDecision {
    let first = mention.first_token();
    let last = mention.last_token();
    let by_scope = scope.contains_any(&mention.token_span);
    let (by_prior, by_post) = match containment {
        Containment::Window(w) => (
            hits.prior.iter().any(|h| h.end <= first && first - h.last() <= w),
            hits.post.iter().any(|h| h.start > last && h.start - last <= w),
        ),
        Containment::Groups(groups) => {
            let (before, after) = zones(mention, groups);
            (
                hits.prior.iter().any(|h| h.end <= first && before.contains(&h.last())),
                hits.post.iter().any(|h| h.start > last && after.contains(&h.start)),
            )
        }
    };
    let seeds = scope.seeds_covering(&mention.token_span);
    let double_negation = seeds.len() >= 2
        || seeds.iter().any(|c| {
            scope
                .per_seed
                .iter()
                .any(|(other, reach)| other != c && reach.contains(c))
        });
    let negated = by_scope || by_prior || by_post;
    NegationDecision {
        polarity: if negated { Polarity::No } else { Polarity::Yes },
        by_scope,
        by_prior,
        by_post,
        double_negation: negated && double_negation,
    }
}

/// Tokens that count as "in the mention's group" for prior (before) and post
/// (after) phrases: the groups touching the mention, plus the run of helper
/// groups since the previous core group or until the next one.
fn zones(mention: &ConceptMention, groups: &[PhrasalGroup]) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let own: Vec<usize> = (0..groups.len())
        .filter(|&g| groups[g].intersects(&mention.token_span))
        .collect();
    let mut base: BTreeSet<usize> = BTreeSet::new();
    for &g in &own {
        base.extend(&groups[g].tokens);
    }
    let (Some(&lo), Some(&hi)) = (own.first(), own.last()) else {
        return (base.clone(), base);
    };
    let mut before = base.clone();
    for g in groups[..lo].iter().rev() {
        if g.is_core() {
            break;
        }
        before.extend(&g.tokens);
    }
    let mut after = base;
    for g in &groups[hi + 1..] {
        if g.is_core() {
            break;
        }
        after.extend(&g.tokens);
    }
    (before, after)
}
