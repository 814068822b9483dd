use serde::{Deserialize, Serialize};

use super::MatchParams;

/// Score differences below this are treated as ties.
const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    /// Index of the word in the vocabulary phrase.
    pub phrase_pos: usize,
    /// Index of the token in the sentence.
    pub token_pos: usize,
    pub rho: f64,
}

/// An order-preserving partial matching of phrase words to sentence tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub pairs: Vec<MatchedPair>,
    pub score: f64,
    /// Unmatched sentence tokens strictly between the first and last match.
    pub gap: usize,
}

impl Alignment {
    pub fn empty() -> Self {
        Alignment {
            pairs: Vec::new(),
            score: 0.0,
            gap: 0,
        }
    }

    /// Number of matched words.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn token_positions(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.token_pos).collect()
    }

    /// Builds an alignment from pairs, computing gap and score.
    pub fn from_pairs(pairs: Vec<MatchedPair>, delta: f64) -> Self {
        let gap = interior_gap(&pairs);
        let score = pairs.iter().map(|p| p.rho).sum::<f64>() - delta * gap as f64;
        Alignment { pairs, score, gap }
    }
}

fn interior_gap(pairs: &[MatchedPair]) -> usize {
    match (pairs.first(), pairs.last()) {
        (Some(a), Some(b)) => b.token_pos - a.token_pos + 1 - pairs.len(),
        _ => 0,
    }
}

/// Length of the longest common prefix over max length, in characters.
/// Inputs are compared as given; callers fold case.
pub fn prefix_ratio(a: &str, b: &str) -> f64 {
    let la = a.chars().count();
    let lb = b.chars().count();
    let longest = la.max(lb);
    if longest == 0 {
        return 0.0;
    }
    let common = a.chars().zip(b.chars()).take_while(|(x, y)| x == y).count();
    common as f64 / longest as f64
}

#[derive(Clone, Copy)]
struct Cell {
    score: f64,
    len: usize,
    next: Option<usize>,
}

fn better(a_score: f64, a_len: usize, b_score: f64, b_len: usize) -> bool {
    a_score > b_score + EPS || ((a_score - b_score).abs() <= EPS && a_len > b_len)
}

/// Best order-preserving alignment of `phrase` words into `sentence` tokens.
///
/// Maximizes the summed prefix ratio of matched pairs minus `delta` per
/// unmatched token between the first and last matched token. Only pairs with
/// ratio at least `tau` may be matched. Ties go to more matched words, then
/// to the leftmost sentence positions. Case is folded before comparison.
pub fn lcf_align<S: AsRef<str>, T: AsRef<str>>(phrase: &[S], sentence: &[T], params: &MatchParams) -> Alignment {
    let phrase: Vec<String> = phrase.iter().map(|w| w.as_ref().to_lowercase()).collect();
    let sentence: Vec<String> = sentence.iter().map(|w| w.as_ref().to_lowercase()).collect();

    // Admissible pairs in (token, word) order.
    let mut cand: Vec<MatchedPair> = Vec::new();
    for (j, t) in sentence.iter().enumerate() {
        for (i, s) in phrase.iter().enumerate() {
            let rho = prefix_ratio(s, t);
            if rho >= params.tau && rho > 0.0 {
                cand.push(MatchedPair {
                    phrase_pos: i,
                    token_pos: j,
                    rho,
                });
            }
        }
    }
    if cand.is_empty() {
        return Alignment::empty();
    }

    // cells[k]: best chain that starts with cand[k].
    let mut cells: Vec<Cell> = vec![
        Cell {
            score: 0.0,
            len: 0,
            next: None,
        };
        cand.len()
    ];
    for k in (0..cand.len()).rev() {
        let p = cand[k];
        let mut best = Cell {
            score: p.rho,
            len: 1,
            next: None,
        };
        for (q, c) in cand.iter().enumerate().skip(k + 1) {
            if c.phrase_pos <= p.phrase_pos || c.token_pos <= p.token_pos {
                continue;
            }
            let penalty = params.delta * (c.token_pos - p.token_pos - 1) as f64;
            let score = p.rho + cells[q].score - penalty;
            let len = 1 + cells[q].len;
            if better(score, len, best.score, best.len) {
                best = Cell {
                    score,
                    len,
                    next: Some(q),
                };
            }
        }
        cells[k] = best;
    }

    let mut start = 0;
    for k in 1..cand.len() {
        if better(cells[k].score, cells[k].len, cells[start].score, cells[start].len) {
            start = k;
        }
    }
    let mut pairs = Vec::with_capacity(cells[start].len);
    let mut cur = Some(start);
    while let Some(k) = cur {
        pairs.push(cand[k]);
        cur = cells[k].next;
    }
    Alignment::from_pairs(pairs, params.delta)
}
