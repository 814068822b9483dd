// Build phrasal groups from a dependency parse and classify them as core or
// helper groups.
//
//     cargo run --example phrasal_groups

use std::fmt::Write;

use finelabel::matcher::{concept_name, detect_phrases, modifier_category};
use finelabel::parsegraph::{classify_and_merge, node_tuples, parse_block, phrasal_groups, RelationSet};
use finelabel::{Extractor, PipelineConfig, Sentence};

const PARSE: &str = "\
1\tthere\t2\texpl
2\tis\t0\troot
3\tleft\t6\tamod
4\tbase\t6\tcompound
5\tstreaky\t6\tamod
6\topacity\t2\tnsubj
7\tdue\t2\tadvmod
8\tto\t7\tfixed
9\txxxx\t10\tcompound
10\tscarring\t7\tpobj
11\tor\t10\tcc
12\tdiscoid\t13\tamod
13\tatelectasis\t10\tconj
";

fn run() -> String {
    let lexicon =
        finelabel::load_lexicon(concat!(env!("CARGO_MANIFEST_DIR"), "/data/lexicon.json")).expect("valid lexicon");
    let ex = Extractor::new(lexicon, PipelineConfig::default()).expect("extractor builds");
    let sentence =
        Sentence::from_text("there is left base streaky opacity due to xxxx scarring or discoid atelectasis.");
    let nodes = parse_block(PARSE, 1).expect("well-formed parse").nodes;
    let words = sentence.words();
    let mut out = String::new();

    let tuples = node_tuples(&nodes, &RelationSet::default_grouping());
    let groups = phrasal_groups(&tuples, sentence.len());
    let mentions = detect_phrases(&sentence, ex.index(), &ex.config().params);
    for m in &mentions {
        let kind = modifier_category(ex.lexicon(), m.concept).map_or("core", |c| c.as_str());
        let name = concept_name(ex.lexicon(), m.concept);
        writeln!(out, "{kind:>15} {name:<20} tokens {:?}", m.token_span).unwrap();
    }
    for g in classify_and_merge(groups, &mentions) {
        let text: Vec<&str> = g.tokens.iter().map(|&t| words[t]).collect();
        writeln!(out, "{:<12} {}", format!("{:?}", g.kind), text.join(" ")).unwrap();
    }
    out
}

fn main() {
    print!("{}", run());
}
