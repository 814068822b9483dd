// Grow a negation scope over a parse and compare it with the window
// fallback used when no parse is available.
//
//     cargo run --example negation_scope

use std::fmt::Write;

use finelabel::negation::{default_cue_relations, default_scope_relations, negation_scope};
use finelabel::parsegraph::parse_block;
use finelabel::pipeline::Structure;
use finelabel::{load_lexicon, Extractor, PipelineConfig, Sentence};

const PARSE: &str = "\
1\tThere\t2\texpl
2\tis\t0\troot
3\tno\t4\tneg
4\tevidence\t2\tnsubj
5\tsuggesting\t4\tacl
6\tthat\t9\tmark
7\tthe\t8\tdet
8\tpatient\t9\tnsubj
9\thas\t5\tccomp
10\tcancer\t9\tdobj
";

fn run() -> String {
    let lexicon = load_lexicon(concat!(env!("CARGO_MANIFEST_DIR"), "/data/lexicon.json")).expect("valid lexicon");
    let sentence = Sentence::from_text("There is no evidence suggesting that the patient has cancer.");
    let nodes = parse_block(PARSE, 1).expect("well-formed parse").nodes;
    let mut out = String::new();

    let scope = negation_scope(
        &nodes,
        &lexicon.negation.cues,
        &default_scope_relations(),
        &default_cue_relations(),
    );
    let scoped: Vec<&str> = scope.scoped_tokens.iter().map(|&t| nodes[t].form.as_str()).collect();
    writeln!(out, "scope: {}", scoped.join(" ")).unwrap();

    let parsed = Extractor::new(lexicon.clone(), PipelineConfig::default()).expect("extractor builds");
    let s = parsed.extract_sentence(&sentence, Structure::Parsed(&nodes));
    for l in &s.labels {
        writeln!(out, "parsed: {}", l.label).unwrap();
    }

    // The cue sits seven tokens before "cancer", outside the default window.
    let flat = Extractor::new(
        lexicon,
        PipelineConfig {
            flat: true,
            ..Default::default()
        },
    )
    .expect("extractor builds");
    let s = flat.extract_sentence(&sentence, Structure::Flat);
    for l in &s.labels {
        writeln!(out, "window: {}", l.label).unwrap();
    }
    out
}

fn main() {
    print!("{}", run());
}
