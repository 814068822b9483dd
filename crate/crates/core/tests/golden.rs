//! Worked examples with hand-checked parses.

mod common;

use finelabel::pipeline::Structure;
use finelabel::{PipelineConfig, Polarity, Sentence};

use common::*;

#[test]
fn normal_chest_labels() {
    let ex = extractor(PipelineConfig::default());
    let out = ex.extract_report(&golden_report("normal_chest"), Some(&golden_parses()));
    let labels: Vec<&str> = out.labels.iter().map(|l| l.label.as_str()).collect();
    assert_eq!(
        labels,
        [
            "anatomicalfinding|yes|normal anatomically|lung",
            "anatomicalfinding|no|airspace disease||||||||focal",
            "anatomicalfinding|no|pleural effusion|pleura",
            "anatomicalfinding|no|pneumothorax",
        ]
    );
    let positive = out.labels.iter().filter(|l| l.polarity == Polarity::Yes).count();
    assert_eq!(positive, 1);
    let with_character: Vec<&str> = out
        .labels
        .iter()
        .filter(|l| l.slots.contains_key("character"))
        .map(|l| l.core.as_str())
        .collect();
    assert_eq!(with_character, ["airspace_disease"]);
    assert_eq!(out.image_ids, ["normal_chest-pa", "normal_chest-lat"]);
}

#[test]
fn left_base_labels_by_sentence() {
    let ex = extractor(PipelineConfig::default());
    let out = ex.extract_report(&golden_report("left_base"), Some(&golden_parses()));
    let by_sentence: Vec<(usize, &str)> = out
        .labels
        .iter()
        .map(|l| (l.sentence_index, l.label.as_str()))
        .collect();
    assert_eq!(
        by_sentence,
        [
            (
                0,
                "anatomicalfinding|yes|streaky opacity|base||left;base|left||||streaky"
            ),
            (0, "anatomicalfinding|yes|scarring"),
            (0, "anatomicalfinding|yes|discoid atelectasis||||||||||discoid"),
            (1, "tubesandlines|yes|picc||right upper extremity|right|right"),
            (1, "tubesandlinesfinding|yes|upper svc|||upper svc"),
        ]
    );
    assert_eq!(out.sentences_processed, 2);
    assert_eq!(out.sentences_with_finding, 2);
}

#[test]
fn no_evidence_scope_negates_cancer() {
    let ex = extractor(PipelineConfig::default());
    let parses = golden_parses();
    let rec = &parses[&("no_evidence".to_string(), 0)];
    let sentence = Sentence::from_text("There is no evidence suggesting that the patient has cancer.");
    let s = ex.extract_sentence(&sentence, Structure::Parsed(&rec.nodes));
    let scoped: Vec<&str> = s
        .scope
        .scoped_tokens
        .iter()
        .map(|&t| sentence.tokens[t].text.as_str())
        .collect();
    assert_eq!(scoped, ["no", "evidence", "suggesting", "has", "cancer"]);
    assert_eq!(s.labels.len(), 1);
    assert_eq!(s.labels[0].label, "disease|no|malignancy");
    assert!(s.decisions.values().all(|d| d.by_scope));
    assert!(s.decisions.values().all(|d| !d.double_negation));
}

/// Without a parse the whole sentence is one group, so every modifier
/// attaches to every finding and a cue only reaches six tokens. The normal chest
/// sentence shows both costs.
#[test]
fn flat_mode_loses_normal_chest_precision() {
    let ex = extractor(PipelineConfig {
        flat: true,
        ..Default::default()
    });
    let labels = report_labels(&ex, &golden_report("normal_chest"), None);
    assert_eq!(labels.len(), 4);
    assert!(labels.iter().all(|l| l.ends_with("|focal")), "{labels:?}");
    let polarities: Vec<&str> = labels.iter().map(|l| l.split('|').nth(1).unwrap()).collect();
    assert_eq!(polarities, ["yes", "no", "no", "yes"]);
}

#[test]
fn lft_breast_mass_synonym() {
    let ex = extractor(PipelineConfig {
        flat: true,
        ..Default::default()
    });
    let s = ex.extract_sentence(&Sentence::from_text("new lft breast palp mass found."), Structure::Flat);
    let cores: Vec<&str> = s.labels.iter().map(|l| l.core.as_str()).collect();
    assert_eq!(cores, ["mass_in_left_breast"]);
}
