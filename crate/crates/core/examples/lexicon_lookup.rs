// Load the shipped lexicon, resolve synonyms and walk the ontology.
//
//     cargo run --example lexicon_lookup

use std::fmt::Write;

use finelabel::{load_lexicon, FindingType};

fn run() -> String {
    let lexicon = load_lexicon(concat!(env!("CARGO_MANIFEST_DIR"), "/data/lexicon.json")).expect("valid lexicon");
    let mut out = String::new();
    writeln!(
        out,
        "{} core findings, {} modifiers",
        lexicon.core_findings.len(),
        lexicon.modifiers.len()
    )
    .unwrap();

    // Lookup folds case and drops stopwords.
    for phrase in ["lft breast mass", "Heart is enlarged", "pleural effusion"] {
        let words: Vec<&str> = phrase.split_whitespace().collect();
        match lexicon.lookup_core(&words) {
            Some(f) => writeln!(out, "{phrase:>20} -> {} ({})", f.id, f.finding_type.as_str()).unwrap(),
            None => writeln!(out, "{phrase:>20} -> not a core finding").unwrap(),
        }
    }

    // Labels name the root of the parent chain.
    let root = lexicon.roll_up("bullous_emphysema").expect("chain reaches a root");
    writeln!(out, "bullous_emphysema rolls up to {}", root.id).unwrap();

    let slots = lexicon.allowed_modifiers(FindingType::AnatomicalFinding).slot_order();
    writeln!(out, "anatomicalfinding slots: {}", slots.join(", ")).unwrap();
    out
}

fn main() {
    print!("{}", run());
}
