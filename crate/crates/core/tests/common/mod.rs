//! Brute-force oracles and fixture loaders shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use finelabel::corpus::read_reports;
use finelabel::matcher::{prefix_ratio, MatchParams};
use finelabel::parsegraph::{read_parses, NodeTuple, ParseNode, ParseStore};
use finelabel::{load_lexicon, Extractor, Lexicon, PipelineConfig, Report};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data(path: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(path)
}

pub fn lexicon() -> Lexicon {
    load_lexicon(data("lexicon.json")).expect("shipped lexicon is valid")
}

pub fn extractor(config: PipelineConfig) -> Extractor {
    Extractor::new(lexicon(), config).expect("extractor builds")
}

pub fn golden_parses() -> ParseStore {
    let f = File::open(data("fixtures/golden.conllu")).unwrap();
    let (store, diags) = read_parses(BufReader::new(f)).unwrap();
    assert!(diags.is_empty(), "{diags:?}");
    store
}

pub fn golden_reports() -> Vec<Report> {
    let f = File::open(data("fixtures/golden_reports.jsonl")).unwrap();
    let (reports, diags) = read_reports(BufReader::new(f)).unwrap();
    assert!(diags.is_empty(), "{diags:?}");
    reports
}

pub fn golden_report(id: &str) -> Report {
    golden_reports().into_iter().find(|r| r.report_id == id).unwrap()
}

/// Labels of one report, in output order.
pub fn report_labels(ex: &Extractor, report: &Report, parses: Option<&ParseStore>) -> Vec<String> {
    ex.extract_report(report, parses)
        .labels
        .into_iter()
        .map(|l| l.label)
        .collect()
}

/// Best (score, matched count) over every order-preserving matching whose
/// pairs all have ratio >= tau, by exhaustive enumeration.
pub fn lcf_brute(phrase: &[String], sentence: &[String], p: &MatchParams) -> (f64, usize) {
    fn go(
        i: usize,
        min_j: usize,
        phrase: &[String],
        sentence: &[String],
        p: &MatchParams,
        chosen: &mut Vec<(usize, f64)>,
        best: &mut (f64, usize),
    ) {
        if i == phrase.len() {
            if let (Some(first), Some(last)) = (chosen.first(), chosen.last()) {
                let gap = last.0 - first.0 + 1 - chosen.len();
                let score: f64 = chosen.iter().map(|c| c.1).sum::<f64>() - p.delta * gap as f64;
                let l = chosen.len();
                if score > best.0 + 1e-9 || ((score - best.0).abs() <= 1e-9 && l > best.1) {
                    *best = (score, l);
                }
            }
            return;
        }
        go(i + 1, min_j, phrase, sentence, p, chosen, best);
        for j in min_j..sentence.len() {
            let rho = prefix_ratio(&phrase[i], &sentence[j]);
            if rho >= p.tau && rho > 0.0 {
                chosen.push((j, rho));
                go(i + 1, j + 1, phrase, sentence, p, chosen, best);
                chosen.pop();
            }
        }
    }
    let mut best = (0.0, 0);
    go(0, 0, phrase, sentence, p, &mut Vec::new(), &mut best);
    best
}

/// Random word over a small alphabet so prefixes collide often.
pub fn random_word(rng: &mut ChaCha8Rng) -> String {
    const ALPHABET: &[u8] = b"abcdef";
    let len = rng.random_range(1..=5);
    (0..len)
        .map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())] as char)
        .collect()
}

pub fn random_words(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> Vec<String> {
    let n = rng.random_range(lo..=hi);
    (0..n).map(|_| random_word(rng)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected components of the "shares an element" relation, computed by
/// repeated boolean matrix closure.
pub fn closure_partition(tuples: &[NodeTuple], n: usize) -> Vec<BTreeSet<usize>> {
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for t in tuples {
        for &a in &t.elements {
            for &b in &t.elements {
                reach[a][b] = true;
            }
        }
    }
    for k in 0..n {
        let via = reach[k].clone();
        for row in reach.iter_mut() {
            if row[k] {
                for (cell, &v) in row.iter_mut().zip(&via) {
                    *cell |= v;
                }
            }
        }
    }
    let mut parts: Vec<BTreeSet<usize>> = Vec::new();
    for row in &reach {
        let set: BTreeSet<usize> = (0..n).filter(|&j| row[j]).collect();
        if !parts.contains(&set) {
            parts.push(set);
        }
    }
    parts.sort_by_key(|s| *s.first().unwrap());
    parts
}

pub fn random_tuples(rng: &mut ChaCha8Rng, n: usize) -> Vec<NodeTuple> {
    let count = rng.random_range(0..=n);
    (0..count)
        .map(|_| {
            let k = rng.random_range(1..=4.min(n));
            let mut elements: Vec<usize> = Vec::new();
            while elements.len() < k {
                let e = rng.random_range(0..n);
                if !elements.contains(&e) {
                    elements.push(e);
                }
            }
            NodeTuple { elements }
        })
        .collect()
}

/// A random dependency tree with `n` tokens and labels from `relations`.
pub fn random_tree(rng: &mut ChaCha8Rng, n: usize, forms: &[&str], relations: &[&str]) -> Vec<ParseNode> {
    let root = rng.random_range(0..n);
    let mut order: Vec<usize> = (0..n).filter(|&i| i != root).collect();
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut heads = vec![0usize; n];
    let mut placed = vec![root];
    for &t in &order {
        heads[t] = placed[rng.random_range(0..placed.len())] + 1;
        placed.push(t);
    }
    (0..n)
        .map(|i| ParseNode {
            index: i + 1,
            form: forms[rng.random_range(0..forms.len())].to_owned(),
            head: if i == root { 0 } else { heads[i] },
            relation: if i == root {
                "root".to_owned()
            } else {
                relations[rng.random_range(0..relations.len())].to_owned()
            },
        })
        .collect()
}

/// Sentences for synthetic flat-mode corpora, with whether each yields a label.
pub const SENTENCE_POOL: &[(&str, bool)] = &[
    ("Mild cardiomegaly.", true),
    ("No pneumothorax.", true),
    ("Small left pleural effusion.", true),
    ("Chest comparison.", false),
    ("Patchy infiltrate in the right lower lobe.", true),
    ("There is no focal airspace disease.", true),
    ("Sternotomy wires are intact.", true),
    ("Stable appearance.", false),
    ("Enteric tube tip in the stomach.", true),
    ("Possible pneumonia at the left base.", true),
    ("Low lung volumes.", true),
    ("Bullous emphysema.", true),
];

/// `n` reports of one to four pooled sentences each, with one or two images.
pub fn synthetic_reports(seed: u64, n: usize) -> Vec<Report> {
    let mut r = rng(seed);
    (0..n)
        .map(|k| {
            let sentences = r.random_range(1..=4);
            let body: Vec<&str> = (0..sentences)
                .map(|_| SENTENCE_POOL[r.random_range(0..SENTENCE_POOL.len())].0)
                .collect();
            let id = format!("s{k:03}");
            let images = (0..r.random_range(1..=2)).map(|i| format!("{id}-{i}")).collect();
            Report {
                report_id: id,
                text: format!("FINDINGS: {}", body.join(" ")),
                image_ids: images,
            }
        })
        .collect()
}
