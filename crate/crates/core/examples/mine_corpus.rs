// Mine a small corpus without parses, select labels by image support and
// print coverage statistics.
//
//     cargo run --example mine_corpus

use std::fmt::Write;

use finelabel::corpus::{coverage_stats, filter_support, mine_corpus, read_manifest};
use finelabel::{load_lexicon, Extractor, PipelineConfig, Report};

const MANIFEST: &str = "report_id,image_id\nr1,r1-pa\nr1,r1-lat\nr2,r2-pa\nr3,r3-ap\n";

fn report(id: &str, text: &str) -> Report {
    Report {
        report_id: id.into(),
        text: text.into(),
        image_ids: Vec::new(),
    }
}

fn run() -> String {
    let lexicon = load_lexicon(concat!(env!("CARGO_MANIFEST_DIR"), "/data/lexicon.json")).expect("valid lexicon");
    let config = PipelineConfig {
        flat: true,
        ..Default::default()
    };
    let ex = Extractor::new(lexicon, config).expect("extractor builds");
    let reports = [
        report(
            "r1",
            "FINDINGS: Mild cardiomegaly. No pneumothorax. IMPRESSION: Stable.",
        ),
        report("r2", "FINDINGS: No pneumothorax. Small left pleural effusion."),
        report("r3", "INDICATION: Cough. FINDINGS: Chest comparison. No pneumothorax."),
    ];
    let manifest = read_manifest(MANIFEST.as_bytes()).expect("valid manifest");
    let mined = mine_corpus(&ex, &reports, None, Some(&manifest), 0);
    let counts = mined.catalog.counts();
    let mut out = String::new();

    for (label, support) in filter_support(&counts, 2) {
        writeln!(out, "{support} images  {label}").unwrap();
    }
    write!(out, "{}", coverage_stats(&counts)).unwrap();
    out
}

fn main() {
    print!("{}", run());
}
