// Align a vocabulary phrase into a sentence and watch the gap penalty work.
//
//     cargo run --example align_phrase

use std::fmt::Write;

use finelabel::matcher::{lcf_align, prefix_ratio};
use finelabel::{MatchParams, Sentence};

fn run() -> String {
    let phrase = ["aortic", "stenosis"];
    let sentence = Sentence::from_text("Marked aortic sclerosis present with evidence of stenosis.");
    let words = sentence.folded_words();
    let mut out = String::new();

    writeln!(
        out,
        "ratio(scler, sclerosis) = {:.3}",
        prefix_ratio("scler", "sclerosis")
    )
    .unwrap();

    for delta in [0.0, 0.05, 0.3] {
        let params = MatchParams::new(0.5, 0.7, delta).expect("valid parameters");
        let a = lcf_align(&phrase, &words, &params);
        let matched: Vec<&str> = a.token_positions().iter().map(|&t| words[t].as_str()).collect();
        let detected = a.len() as f64 >= params.gamma * phrase.len() as f64;
        writeln!(
            out,
            "delta {delta:<4} score {:.3} gap {} matched [{}] detected {detected}",
            a.score,
            a.gap,
            matched.join(" ")
        )
        .unwrap();
    }
    out
}

fn main() {
    print!("{}", run());
}
