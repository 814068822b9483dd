// Run the whole pipeline on one parsed report and read a label back into
// its slots.
//
//     cargo run --example label_sentence

use std::fmt::Write;
use std::io::Cursor;

use finelabel::labeler::parse_label;
use finelabel::parsegraph::read_parses;
use finelabel::{load_lexicon, Extractor, PipelineConfig, Report};

const PARSES: &str = "\
# report_id = r1
# sentence_index = 0
1\tthe\t6\tdet
2\tright\t4\tamod
3\tupper\t4\tamod
4\textremity\t5\tcompound
5\tpicc\t6\tcompound
6\ttip\t7\tnsubj
7\tis\t0\troot
8\tin\t11\tcase
9\tthe\t11\tdet
10\tupper\t11\tamod
11\tsvc\t7\tobl
";

fn run() -> String {
    let lexicon = load_lexicon(concat!(env!("CARGO_MANIFEST_DIR"), "/data/lexicon.json")).expect("valid lexicon");
    let ex = Extractor::new(lexicon, PipelineConfig::default()).expect("extractor builds");
    let (parses, _) = read_parses(Cursor::new(PARSES)).expect("readable parses");
    let report = Report {
        report_id: "r1".into(),
        text: "FINDINGS: the right upper extremity picc tip is in the upper svc.".into(),
        image_ids: vec!["r1-ap".into()],
    };
    let mut out = String::new();

    let extraction = ex.extract_report(&report, Some(&parses));
    for l in &extraction.labels {
        writeln!(out, "{}", l.label).unwrap();
    }

    let first = &extraction.labels[0];
    let pattern = parse_label(&first.label, &ex.lexicon().templates).expect("labels parse");
    let template = ex.lexicon().allowed_modifiers(pattern.finding_type);
    for (slot, values) in pattern.named_slots(template) {
        writeln!(out, "  {slot} = {}", values.join(";")).unwrap();
    }
    out
}

fn main() {
    print!("{}", run());
}
