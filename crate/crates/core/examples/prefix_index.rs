// Show the distinguishing prefixes the index stores and which phrases a
// sentence makes candidates.
//
//     cargo run --example prefix_index

use std::fmt::Write;

use finelabel::matcher::{build_index, candidate_phrases};
use finelabel::{load_lexicon, Sentence};

fn run() -> String {
    let lexicon = load_lexicon(concat!(env!("CARGO_MANIFEST_DIR"), "/data/lexicon.json")).expect("valid lexicon");
    let index = build_index(&lexicon).expect("index builds");
    let mut out = String::new();

    // "aortic" is shared by two findings, so those phrases need longer
    // prefixes on their second word.
    for surface in ["aortic sclerosis", "aortic stenosis", "lft breast mass", "pneumothorax"] {
        let p = index.phrases().iter().find(|p| p.surface == surface).expect("indexed");
        writeln!(out, "{surface:>18}: {}", p.prefixes.join(" + ")).unwrap();
    }

    // A phrase is a candidate only when every one of its prefixes starts
    // some token of the sentence.
    let sentence = Sentence::from_text("Marked aortic scler. present with evidence of stenosis.");
    let found: Vec<&str> = candidate_phrases(&sentence, &index)
        .into_iter()
        .map(|id| index.phrase(id).surface.as_str())
        .collect();
    writeln!(out, "candidates: {}", found.join(", ")).unwrap();
    out
}

fn main() {
    print!("{}", run());
}
