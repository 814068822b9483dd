//! Modifier association and label completion.

mod grammar;

pub use crate::negation::Polarity;
pub use grammar::{parse_label, LabelParseError, LabelPattern};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::lexicon::{FindingType, Lexicon, ModifierCategory};
use crate::matcher::{ConceptMention, ConceptRef};
use crate::parsegraph::PhrasalGroup;

/// Modifier mentions attached to each core mention, by index into the
/// mention list.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Association {
    pub attached: BTreeMap<usize, Vec<usize>>,
    /// Modifiers with no core group to attach to.
    pub dropped: Vec<usize>,
}

/// Modifiers inside a core group go to every core finding of that group.
/// Modifiers in helper groups go to the nearest core group by token distance,
/// preferring the following group on ties.
pub fn associate_modifiers(groups: &[PhrasalGroup], mentions: &[ConceptMention]) -> Association {
    let mut out = Association::default();
    for (c, m) in mentions.iter().enumerate() {
        if m.is_core() {
            out.attached.insert(c, Vec::new());
        }
    }
    let core_groups: Vec<&PhrasalGroup> = groups.iter().filter(|g| g.is_core()).collect();
    for (mi, m) in mentions.iter().enumerate() {
        if m.is_core() {
            continue;
        }
        let own: Vec<&PhrasalGroup> = groups.iter().filter(|g| g.intersects(&m.token_span)).collect();
        let mut targets: Vec<&PhrasalGroup> = own.iter().copied().filter(|g| g.is_core()).collect();
        if targets.is_empty() {
            let nearest = core_groups
                .iter()
                .map(|c| {
                    let d = own.iter().map(|g| g.distance(c)).min().unwrap_or(usize::MAX);
                    (d, std::cmp::Reverse(c.first()), *c)
                })
                .min_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
            targets.extend(nearest.map(|(_, _, g)| g));
        }
        if targets.is_empty() {
            out.dropped.push(mi);
            continue;
        }
        for g in targets {
            for &c in &g.mentions {
                if mentions[c].is_core() {
                    out.attached.get_mut(&c).expect("core mention").push(mi);
                }
            }
        }
    }
    for mods in out.attached.values_mut() {
        mods.sort_by_key(|&i| (mentions[i].first_token(), i));
        mods.dedup();
    }
    out
}

/// One extracted label with its provenance. Serializes as one JSON-lines
/// record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FineGrainedLabel {
    pub report_id: String,
    pub sentence_index: usize,
    pub label: String,
    #[serde(rename = "type")]
    pub finding_type: FindingType,
    pub polarity: Polarity,
    /// Id of the rolled-up core finding.
    pub core: String,
    /// Nonempty slots by name.
    pub slots: BTreeMap<String, Vec<String>>,
    /// Token spans of the core mention followed by its modifiers.
    #[serde(default)]
    pub spans: Vec<Vec<usize>>,
}

/// Builds the label for one core mention. Fails when the finding's parent
/// chain does not reach a root.
pub fn complete_pattern(
    core: &ConceptMention,
    modifiers: &[&ConceptMention],
    polarity: Polarity,
    lexicon: &Lexicon,
) -> Result<(LabelPattern, String), String> {
    let ConceptRef::Core(ci) = core.concept else {
        return Err(format!("{core} is not a core finding"));
    };
    let matched = &lexicon.core_findings[ci];
    let root = lexicon
        .roll_up(&matched.id)
        .ok_or_else(|| format!("core finding '{}' has no roll-up path", matched.id))?;
    let template = lexicon.allowed_modifiers(root.finding_type);
    let mut pattern = LabelPattern::new(
        root.finding_type,
        polarity,
        &root.canonical_name.to_lowercase(),
        template,
    );
    for m in modifiers {
        let ConceptRef::Modifier(mi) = m.concept else {
            continue;
        };
        let term = &lexicon.modifiers[mi];
        if let Some(k) = template.slot_for(term.category) {
            let value = term.phrase.to_string().to_lowercase();
            if !pattern.slots[k].contains(&value) {
                pattern.slots[k].push(value);
            }
        }
    }
    if let Some(k) = template.slot_for(ModifierCategory::AnatomyAffected) {
        let default = matched.default_anatomy.as_ref().or(root.default_anatomy.as_ref());
        if let (true, Some(anatomy)) = (pattern.slots[k].is_empty(), default) {
            pattern.slots[k].push(anatomy.to_string().to_lowercase());
        }
    }
    Ok((pattern, root.id.clone()))
}

/// Labels for one sentence in core-mention order, identical strings merged.
pub fn label_sentence(
    lexicon: &Lexicon,
    report_id: &str,
    sentence_index: usize,
    mentions: &[ConceptMention],
    association: &Association,
    polarities: &BTreeMap<usize, Polarity>,
) -> (Vec<FineGrainedLabel>, Vec<String>) {
    let mut labels: Vec<FineGrainedLabel> = Vec::new();
    let mut diagnostics = Vec::new();
    for (&ci, mods) in &association.attached {
        let core = &mentions[ci];
        let attached: Vec<&ConceptMention> = mods.iter().map(|&i| &mentions[i]).collect();
        let polarity = polarities.get(&ci).copied().unwrap_or(Polarity::Yes);
        match complete_pattern(core, &attached, polarity, lexicon) {
            Ok((pattern, root_id)) => {
                let template = lexicon.allowed_modifiers(pattern.finding_type);
                let label = pattern.render(template);
                if labels.iter().any(|l| l.label == label) {
                    continue;
                }
                let mut spans = vec![core.token_span.clone()];
                spans.extend(attached.iter().map(|m| m.token_span.clone()));
                labels.push(FineGrainedLabel {
                    report_id: report_id.to_owned(),
                    sentence_index,
                    slots: pattern.named_slots(template),
                    label,
                    finding_type: pattern.finding_type,
                    polarity,
                    core: root_id,
                    spans,
                });
            }
            Err(e) => diagnostics.push(format!("{report_id}#{sentence_index}: {e}")),
        }
    }
    for &d in &association.dropped {
        diagnostics.push(format!(
            "{report_id}#{sentence_index}: modifier {} has no finding to attach to",
            mentions[d]
        ));
    }
    (labels, diagnostics)
}
