//! Phrasal groups from dependency parses.
//!
//! Every head that has dependents attached through a grouping relation forms
//! a tuple `(head, dep1, dep2, ...)`. Tuples sharing a token are joined
//! transitively; the resulting connected components are the phrasal groups.
//! Groups containing a core finding are *core* groups, the rest are
//! *helper* groups.

mod conll;
mod union_find;

pub use conll::{parse_block, read_parses, ParseRecord, ParseStore};
pub use union_find::UnionFind;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matcher::ConceptMention;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseNode {
    /// 1-based token position.
    pub index: usize,
    pub form: String,
    /// 1-based head position, 0 for the root.
    pub head: usize,
    pub relation: String,
}

impl ParseNode {
    /// 0-based token index.
    pub fn token(&self) -> usize {
        self.index - 1
    }

    /// 0-based head token index, `None` for the root.
    pub fn head_token(&self) -> Option<usize> {
        self.head.checked_sub(1)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("parse has {found} tokens but the sentence has {expected}")]
    TokenCountMismatch { expected: usize, found: usize },
    #[error("parse has {0} roots, expected exactly one")]
    RootCount(usize),
    #[error("token {index} has head {head} outside the sentence")]
    HeadOutOfRange { index: usize, head: usize },
    #[error("token rows out of order: expected index {expected}, found {found}")]
    IndexOrder { expected: usize, found: usize },
}

/// Validates a parse against a sentence of `token_count` tokens.
pub fn ingest_parse(record: &ParseRecord, token_count: usize) -> Result<Vec<ParseNode>, ParseError> {
    let nodes = &record.nodes;
    if nodes.len() != token_count {
        return Err(ParseError::TokenCountMismatch {
            expected: token_count,
            found: nodes.len(),
        });
    }
    for (k, n) in nodes.iter().enumerate() {
        if n.index != k + 1 {
            return Err(ParseError::IndexOrder {
                expected: k + 1,
                found: n.index,
            });
        }
        if n.head > nodes.len() || n.head == n.index {
            return Err(ParseError::HeadOutOfRange {
                index: n.index,
                head: n.head,
            });
        }
    }
    let roots = nodes.iter().filter(|n| n.head == 0).count();
    if roots != 1 {
        return Err(ParseError::RootCount(roots));
    }
    Ok(nodes.clone())
}

/// A set of dependency relation labels. `nmod` also matches subtyped labels
/// such as `nmod:poss`; comparison ignores case.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelationSet(BTreeSet<String>);

impl RelationSet {
    pub fn new<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        RelationSet(labels.into_iter().map(|s| s.as_ref().to_lowercase()).collect())
    }

    pub fn contains(&self, relation: &str) -> bool {
        let rel = relation.to_lowercase();
        if self.0.contains(&rel) {
            return true;
        }
        rel.split_once(':').is_some_and(|(base, _)| self.0.contains(base))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    /// Noun-phrase-internal relations: modifiers, compounds, determiners,
    /// numerals, nominal modifiers and fixed/flat multiword expressions.
    /// Subjects, clausal links and coordination are deliberately absent so
    /// conjoined findings stay in separate groups.
    pub fn default_grouping() -> Self {
        RelationSet::new([
            "amod", "compound", "nn", "det", "nummod", "num", "nmod", "flat", "fixed", "mwe",
        ])
    }
}

/// `(t1, t2, ..., tk)`: token `t1` and the tokens grammatically attached to
/// it. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeTuple {
    pub elements: Vec<usize>,
}

pub fn node_tuples(nodes: &[ParseNode], grouping: &RelationSet) -> Vec<NodeTuple> {
    let mut deps: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for n in nodes {
        if let Some(h) = n.head_token() {
            if grouping.contains(&n.relation) {
                deps[h].push(n.token());
            }
        }
    }
    deps.into_iter()
        .enumerate()
        .filter(|(_, d)| !d.is_empty())
        .map(|(h, mut d)| {
            d.sort_unstable();
            let mut elements = vec![h];
            elements.extend(d);
            NodeTuple { elements }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Unclassified,
    Core,
    Helper,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhrasalGroup {
    pub tokens: BTreeSet<usize>,
    pub kind: GroupKind,
    /// Indices into the mention list given to [`classify_and_merge`].
    pub mentions: Vec<usize>,
}

impl PhrasalGroup {
    fn new(tokens: impl IntoIterator<Item = usize>) -> Self {
        PhrasalGroup {
            tokens: tokens.into_iter().collect(),
            kind: GroupKind::Unclassified,
            mentions: Vec::new(),
        }
    }

    pub fn first(&self) -> usize {
        *self.tokens.first().expect("groups are nonempty")
    }

    pub fn last(&self) -> usize {
        *self.tokens.last().expect("groups are nonempty")
    }

    pub fn is_core(&self) -> bool {
        self.kind == GroupKind::Core
    }

    pub fn intersects(&self, span: &[usize]) -> bool {
        span.iter().any(|t| self.tokens.contains(t))
    }

    /// Smallest token distance between the two groups.
    pub fn distance(&self, other: &PhrasalGroup) -> usize {
        self.tokens
            .iter()
            .flat_map(|a| other.tokens.iter().map(move |b| a.abs_diff(*b)))
            .min()
            .unwrap_or(usize::MAX)
    }
}

/// Connected components of the tuples over `token_count` tokens. Tokens in
/// no tuple become singleton groups. Groups are ordered by first token.
pub fn phrasal_groups(tuples: &[NodeTuple], token_count: usize) -> Vec<PhrasalGroup> {
    let n = tuples
        .iter()
        .flat_map(|t| t.elements.iter().map(|e| e + 1))
        .max()
        .unwrap_or(0)
        .max(token_count);
    let mut uf = UnionFind::new(n);
    for t in tuples {
        for w in t.elements.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    uf.sets().into_iter().map(PhrasalGroup::new).collect()
}

/// Whole sentence as a single group, for sentences without a parse.
pub fn flat_groups(token_count: usize, mentions: &[ConceptMention]) -> Vec<PhrasalGroup> {
    if token_count == 0 {
        return Vec::new();
    }
    classify_and_merge(vec![PhrasalGroup::new(0..token_count)], mentions)
}

/// True when no third group has a token strictly between the two extents.
pub fn adjacent(a: &PhrasalGroup, b: &PhrasalGroup, all: &[PhrasalGroup]) -> bool {
    let lo = a.last().min(b.last());
    let hi = a.first().max(b.first());
    if lo >= hi {
        return true;
    }
    !all.iter()
        .filter(|g| *g != a && *g != b)
        .any(|g| g.tokens.range(lo + 1..hi).next().is_some())
}

/// Marks groups core or helper and merges adjacent groups that one core
/// mention spans. Applying it twice is the same as applying it once.
pub fn classify_and_merge(mut groups: Vec<PhrasalGroup>, mentions: &[ConceptMention]) -> Vec<PhrasalGroup> {
    'outer: loop {
        for m in mentions.iter().filter(|m| m.is_core()) {
            let mut hit: Vec<usize> = (0..groups.len())
                .filter(|&g| groups[g].intersects(&m.token_span))
                .collect();
            hit.sort_by_key(|&g| groups[g].first());
            for w in hit.windows(2) {
                let (a, b) = (w[0], w[1]);
                if adjacent(&groups[a], &groups[b], &groups) {
                    let taken = std::mem::take(&mut groups[b].tokens);
                    groups[a].tokens.extend(taken);
                    groups.remove(b);
                    continue 'outer;
                }
            }
        }
        break;
    }
    groups.sort_by_key(|g| g.first());
    for g in &mut groups {
        g.mentions = mentions
            .iter()
            .enumerate()
            .filter(|(_, m)| g.intersects(&m.token_span))
            .map(|(i, _)| i)
            .collect();
        let core = g.mentions.iter().any(|&i| mentions[i].is_core());
        g.kind = if core { GroupKind::Core } else { GroupKind::Helper };
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::{Alignment, ConceptRef, PhraseId};

    fn node(index: usize, form: &str, head: usize, rel: &str) -> ParseNode {
        ParseNode {
            index,
            form: form.into(),
            head,
            relation: rel.into(),
        }
    }

    fn record(nodes: Vec<ParseNode>) -> ParseRecord {
        ParseRecord {
            report_id: None,
            sentence_index: None,
            nodes,
        }
    }

    fn mention(core: bool, span: &[usize]) -> ConceptMention {
        ConceptMention {
            concept: if core {
                ConceptRef::Core(0)
            } else {
                ConceptRef::Modifier(0)
            },
            phrase: PhraseId(0),
            sentence_index: 0,
            alignment: Alignment::empty(),
            token_span: span.to_vec(),
        }
    }

    fn sets(groups: &[PhrasalGroup]) -> Vec<Vec<usize>> {
        groups.iter().map(|g| g.tokens.iter().copied().collect()).collect()
    }

    fn five() -> Vec<ParseNode> {
        vec![
            node(1, "no", 3, "det"),
            node(2, "focal", 3, "amod"),
            node(3, "consolidation", 0, "root"),
            node(4, "or", 5, "cc"),
            node(5, "effusion", 3, "conj"),
        ]
    }

    #[test]
    fn ingest_well_formed() {
        let mut nodes = five();
        nodes[1].head = 0;
        nodes[1].relation = "root".into();
        nodes[2].head = 2;
        nodes[2].relation = "x".into();
        let got = ingest_parse(&record(nodes), 5).unwrap();
        assert_eq!(got.len(), 5);
        assert_eq!(got[1].head, 0);
    }

    #[test]
    fn ingest_rejects_bad_parses() {
        assert_eq!(
            ingest_parse(&record(five()[..4].to_vec()), 5),
            Err(ParseError::TokenCountMismatch { expected: 5, found: 4 })
        );
        let mut two_roots = five();
        two_roots[4].head = 0;
        assert_eq!(ingest_parse(&record(two_roots), 5), Err(ParseError::RootCount(2)));
        let mut far = five();
        far[0].head = 9;
        assert!(matches!(
            ingest_parse(&record(far), 5),
            Err(ParseError::HeadOutOfRange { .. })
        ));
    }

    #[test]
    fn tuples_follow_grouping_relations_only() {
        let t = node_tuples(&five(), &RelationSet::default_grouping());
        assert_eq!(
            t,
            vec![NodeTuple {
                elements: vec![2, 0, 1]
            }]
        );
    }

    #[test]
    fn subtyped_relations_match_base() {
        let r = RelationSet::new(["nmod"]);
        assert!(r.contains("nmod:poss"));
        assert!(r.contains("NMOD"));
        assert!(!r.contains("nsubj"));
    }

    #[test]
    fn components() {
        let tuples = vec![
            NodeTuple { elements: vec![1, 2] },
            NodeTuple { elements: vec![2, 3] },
            NodeTuple { elements: vec![5, 6] },
        ];
        let g = phrasal_groups(&tuples, 7);
        assert_eq!(sets(&g), vec![vec![0], vec![1, 2, 3], vec![4], vec![5, 6]]);
        let empty = phrasal_groups(&[], 4);
        assert_eq!(sets(&empty), vec![vec![0], vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn mention_across_adjacent_groups_merges() {
        let groups = phrasal_groups(
            &[NodeTuple { elements: vec![0, 1] }, NodeTuple { elements: vec![2, 3] }],
            5,
        );
        let merged = classify_and_merge(groups, &[mention(true, &[1, 2])]);
        assert_eq!(sets(&merged), vec![vec![0, 1, 2, 3], vec![4]]);
        assert_eq!(merged[0].kind, GroupKind::Core);
        assert_eq!(merged[1].kind, GroupKind::Helper);
    }

    #[test]
    fn non_adjacent_groups_stay_apart() {
        let groups = phrasal_groups(&[], 3);
        let merged = classify_and_merge(groups, &[mention(true, &[0, 2])]);
        assert_eq!(sets(&merged), vec![vec![0], vec![1], vec![2]]);
        assert!(merged[0].is_core() && merged[2].is_core() && !merged[1].is_core());
    }

    #[test]
    fn mention_inside_one_group() {
        let groups = phrasal_groups(&[NodeTuple { elements: vec![0, 1] }], 3);
        let out = classify_and_merge(groups.clone(), &[mention(true, &[1]), mention(false, &[2])]);
        assert_eq!(sets(&out), sets(&groups));
        assert_eq!(out[0].mentions, [0]);
        assert_eq!(out[1].mentions, [1]);
        assert_eq!(out[1].kind, GroupKind::Helper);
    }

    #[test]
    fn no_mentions_means_all_helpers() {
        let out = classify_and_merge(phrasal_groups(&[], 3), &[]);
        assert!(out.iter().all(|g| g.kind == GroupKind::Helper));
    }

    #[test]
    fn interleaved_extents_are_adjacent() {
        let a = PhrasalGroup::new([0, 2]);
        let b = PhrasalGroup::new([1, 3]);
        assert!(adjacent(&a, &b, &[a.clone(), b.clone()]));
    }

    #[test]
    fn flat_mode_single_group() {
        let g = flat_groups(4, &[mention(true, &[2])]);
        assert_eq!(g.len(), 1);
        assert!(g[0].is_core());
        assert!(flat_groups(0, &[]).is_empty());
    }
}
