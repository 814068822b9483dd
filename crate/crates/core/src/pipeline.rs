//! Per-sentence and per-report extraction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labeler::{associate_modifiers, label_sentence, Association, FineGrainedLabel};
use crate::lexicon::{Lexicon, Phrase};
use crate::matcher::{
    build_index, detect_phrases, ConceptMention, IndexError, MatchParams, ParamError, VocabularyIndex,
};
use crate::negation::{
    default_cue_relations, default_scope_relations, find_phrases, negation_scope, polarity, Containment,
    NegationDecision, NegationScope, VocabularyHits,
};
use crate::parsegraph::{
    classify_and_merge, flat_groups, ingest_parse, node_tuples, phrasal_groups, ParseNode, ParseStore, PhrasalGroup,
    RelationSet,
};
use crate::textprep::{report_sentences, Report, SectionConfig, SectionKind, Sentence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionFilter {
    /// Findings and impression only. Reports with neither are read whole.
    FindingsImpression,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub params: MatchParams,
    pub grouping_relations: RelationSet,
    pub scope_relations: RelationSet,
    pub cue_relations: RelationSet,
    pub sections: SectionFilter,
    /// Ignore parses: one group per sentence, window-based negation.
    pub flat: bool,
    /// Use the parse for negation scope. When off, cues act as prior phrases
    /// within the window.
    pub parse_negation: bool,
    pub window: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            params: MatchParams::default(),
            grouping_relations: RelationSet::default_grouping(),
            scope_relations: default_scope_relations(),
            cue_relations: default_cue_relations(),
            sections: SectionFilter::FindingsImpression,
            flat: false,
            parse_negation: true,
            window: 6,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Index(#[from] IndexError),
}

/// Sentence structure available to the pipeline.
#[derive(Debug, Clone, Copy)]
pub enum Structure<'a> {
    Parsed(&'a [ParseNode]),
    Flat,
}

#[derive(Debug, Clone)]
pub struct SentenceExtraction {
    pub mentions: Vec<ConceptMention>,
    pub groups: Vec<PhrasalGroup>,
    pub scope: NegationScope,
    pub association: Association,
    /// Decision per core mention index.
    pub decisions: BTreeMap<usize, NegationDecision>,
    pub labels: Vec<FineGrainedLabel>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportExtraction {
    pub report_id: String,
    pub image_ids: Vec<String>,
    pub sentences_processed: usize,
    pub sentences_with_finding: usize,
    pub sentences_skipped: usize,
    pub labels: Vec<FineGrainedLabel>,
    pub diagnostics: Vec<String>,
}

/// A lexicon, its index and a configuration, ready to label text.
#[derive(Debug, Clone)]
pub struct Extractor {
    lexicon: Lexicon,
    index: VocabularyIndex,
    config: PipelineConfig,
    sections: SectionConfig,
}

impl Extractor {
    pub fn new(lexicon: Lexicon, config: PipelineConfig) -> Result<Self, ConfigError> {
        config.params.validate()?;
        let index = build_index(&lexicon)?;
        Ok(Extractor {
            lexicon,
            index,
            config,
            sections: SectionConfig::default(),
        })
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn index(&self) -> &VocabularyIndex {
        &self.index
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    /// Detection, grouping, negation and labeling for one sentence.
    pub fn extract_sentence(&self, sentence: &Sentence, structure: Structure<'_>) -> SentenceExtraction {
        let cfg = &self.config;
        let mentions = detect_phrases(sentence, &self.index, &cfg.params);
        let words = sentence.folded_words();
        let neg = &self.lexicon.negation;

        let groups = match structure {
            Structure::Parsed(nodes) => {
                let tuples = node_tuples(nodes, &cfg.grouping_relations);
                classify_and_merge(phrasal_groups(&tuples, sentence.len()), &mentions)
            }
            Structure::Flat => flat_groups(sentence.len(), &mentions),
        };

        let (scope, containment, hits) = match structure {
            Structure::Parsed(nodes) if cfg.parse_negation => (
                negation_scope(nodes, &neg.cues, &cfg.scope_relations, &cfg.cue_relations),
                Containment::Groups(&groups),
                VocabularyHits {
                    prior: find_phrases(&words, &neg.prior),
                    post: find_phrases(&words, &neg.post),
                },
            ),
            _ => {
                let prior_and_cues: Vec<Phrase> = neg.prior.iter().chain(&neg.cues).cloned().collect();
                (
                    NegationScope::default(),
                    Containment::Window(cfg.window),
                    VocabularyHits {
                        prior: find_phrases(&words, &prior_and_cues),
                        post: find_phrases(&words, &neg.post),
                    },
                )
            }
        };

        let mut diagnostics = Vec::new();
        let decisions: BTreeMap<usize, NegationDecision> = mentions
            .iter()
            .enumerate()
            .filter(|(_, m)| m.is_core())
            .map(|(i, m)| (i, polarity(m, &scope, containment, &hits)))
            .collect();
        for (&i, d) in &decisions {
            if d.double_negation {
                diagnostics.push(format!(
                    "{}#{}: double negation on {}, reported as negative",
                    sentence.report_id, sentence.index, mentions[i]
                ));
            }
        }

        let association = associate_modifiers(&groups, &mentions);
        let polarities = decisions.iter().map(|(&i, d)| (i, d.polarity)).collect();
        let (labels, label_diags) = label_sentence(
            &self.lexicon,
            &sentence.report_id,
            sentence.index,
            &mentions,
            &association,
            &polarities,
        );
        diagnostics.extend(label_diags);
        SentenceExtraction {
            mentions,
            groups,
            scope,
            association,
            decisions,
            labels,
            diagnostics,
        }
    }

    /// Sentences of `report` the configuration selects.
    pub fn selected_sentences(&self, report: &Report) -> Vec<Sentence> {
        let all = report_sentences(report, &self.sections);
        if self.config.sections == SectionFilter::All {
            return all;
        }
        let wanted = |s: &Sentence| matches!(s.section, SectionKind::Findings | SectionKind::Impression);
        if all.iter().any(wanted) {
            all.into_iter().filter(wanted).collect()
        } else {
            all
        }
    }

    /// Labels every selected sentence. Without flat mode a sentence needs a
    /// valid parse in `parses`; sentences lacking one are skipped and logged.
    pub fn extract_report(&self, report: &Report, parses: Option<&ParseStore>) -> ReportExtraction {
        let mut out = ReportExtraction {
            report_id: report.report_id.clone(),
            image_ids: report.image_ids.clone(),
            ..Default::default()
        };
        for sentence in self.selected_sentences(report) {
            let key = (report.report_id.clone(), sentence.index);
            let nodes;
            let structure = if self.config.flat {
                Structure::Flat
            } else {
                let Some(record) = parses.and_then(|p| p.get(&key)) else {
                    out.sentences_skipped += 1;
                    out.diagnostics
                        .push(format!("{}#{}: no parse, sentence skipped", key.0, key.1));
                    continue;
                };
                match ingest_parse(record, sentence.len()) {
                    Ok(n) => {
                        nodes = n;
                        Structure::Parsed(&nodes)
                    }
                    Err(e) => {
                        out.sentences_skipped += 1;
                        out.diagnostics
                            .push(format!("{}#{}: {e}, sentence skipped", key.0, key.1));
                        continue;
                    }
                }
            };
            let ex = self.extract_sentence(&sentence, structure);
            out.sentences_processed += 1;
            if !ex.labels.is_empty() {
                out.sentences_with_finding += 1;
            }
            out.labels.extend(ex.labels);
            out.diagnostics.extend(ex.diagnostics);
        }
        out
    }
}
