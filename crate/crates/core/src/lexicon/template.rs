use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{FindingType, ModifierCategory};

/// One modifier position in a label template.
///
/// Most slots are named after the category that fills them. A few are
/// renamed (`tubesandlineslocation` is filled by `location`) and some carry
/// no category at all; those are kept as opaque, always-empty positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModifierSlot {
    pub name: String,
    pub category: Option<ModifierCategory>,
}

impl ModifierSlot {
    pub fn category(c: ModifierCategory) -> Self {
        ModifierSlot {
            name: c.as_str().to_owned(),
            category: Some(c),
        }
    }

    pub fn renamed(name: &str, c: ModifierCategory) -> Self {
        ModifierSlot {
            name: name.to_owned(),
            category: Some(c),
        }
    }

    pub fn opaque(name: &str) -> Self {
        ModifierSlot {
            name: name.to_owned(),
            category: None,
        }
    }
}

/// Slot layout of a rendered label for one finding type: head word, polarity,
/// core finding, then the modifier slots in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotTemplate {
    pub finding_type: FindingType,
    pub head: String,
    pub polarity_slot: String,
    pub core_slot: String,
    /// How `yes`/`no` read for this type, e.g. ill-placed/well-placed.
    pub polarity_reading: Option<String>,
    pub modifier_slots: Vec<ModifierSlot>,
}

impl SlotTemplate {
    pub fn slot_order(&self) -> Vec<&str> {
        let mut order = vec![self.head.as_str(), self.polarity_slot.as_str(), self.core_slot.as_str()];
        order.extend(self.modifier_slots.iter().map(|s| s.name.as_str()));
        order
    }

    /// Index into `modifier_slots` of the slot filled by `category`.
    pub fn slot_for(&self, category: ModifierCategory) -> Option<usize> {
        self.modifier_slots.iter().position(|s| s.category == Some(category))
    }

    pub fn permits(&self, category: ModifierCategory) -> bool {
        self.slot_for(category).is_some()
    }

    pub fn categories(&self) -> impl Iterator<Item = ModifierCategory> + '_ {
        self.modifier_slots.iter().filter_map(|s| s.category)
    }

    pub(super) fn from_file(ft: FindingType, raw: &TemplateFile) -> Result<Self, String> {
        for (what, v) in [("head", &raw.head), ("polarity", &raw.polarity), ("core", &raw.core)] {
            if v.trim().is_empty() {
                return Err(format!("empty {what} slot name"));
            }
            if v.contains('|') || v.contains(';') {
                return Err(format!("{what} slot name '{v}' contains a reserved character"));
            }
        }
        let modifier_slots: Vec<ModifierSlot> = raw
            .modifiers
            .iter()
            .map(|e| match e {
                SlotEntry::Category(c) => ModifierSlot::category(*c),
                SlotEntry::Named { slot, category } => ModifierSlot {
                    name: slot.clone(),
                    category: *category,
                },
            })
            .collect();
        let mut seen = BTreeSet::new();
        for s in &modifier_slots {
            if s.name.trim().is_empty() {
                return Err("empty modifier slot name".into());
            }
            if let Some(c) = s.category {
                if !seen.insert(c) {
                    return Err(format!("modifier category {c} appears more than once"));
                }
            }
        }
        let t = SlotTemplate {
            finding_type: ft,
            head: raw.head.clone(),
            polarity_slot: raw.polarity.clone(),
            core_slot: raw.core.clone(),
            polarity_reading: raw.polarity_reading.clone(),
            modifier_slots,
        };
        if ft == FindingType::Viewpoint && t.slot_order() != ["views", "positive", "findingname"] {
            return Err(format!(
                "viewpoint template must be [views, positive, findingname], got {:?}",
                t.slot_order()
            ));
        }
        Ok(t)
    }

    pub(super) fn to_file(&self) -> TemplateFile {
        TemplateFile {
            head: self.head.clone(),
            polarity: self.polarity_slot.clone(),
            core: self.core_slot.clone(),
            polarity_reading: self.polarity_reading.clone(),
            modifiers: self
                .modifier_slots
                .iter()
                .map(|s| match s.category {
                    Some(c) if c.as_str() == s.name => SlotEntry::Category(c),
                    category => SlotEntry::Named {
                        slot: s.name.clone(),
                        category,
                    },
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(super) struct TemplateFile {
    head: String,
    polarity: String,
    core: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    polarity_reading: Option<String>,
    #[serde(default)]
    modifiers: Vec<SlotEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum SlotEntry {
    Category(ModifierCategory),
    Named {
        slot: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        category: Option<ModifierCategory>,
    },
}

/// The stock templates, one per finding type.
pub fn default_templates() -> BTreeMap<FindingType, SlotTemplate> {
    use ModifierCategory::*;
    const TAIL: [ModifierCategory; 10] = [
        Laterality,
        Severity,
        Size,
        Hedge,
        Character,
        Procedure,
        Shape,
        Correlation,
        Measure,
        Cause,
    ];
    let tail = || {
        TAIL.iter()
            .copied()
            .chain(std::iter::once(Symptom))
            .map(ModifierSlot::category)
    };
    let full = || {
        [AnatomyAffected, Subanatomy, Location]
            .into_iter()
            .map(ModifierSlot::category)
            .chain(tail())
            .collect::<Vec<_>>()
    };
    let present = Some("present(positive)/absent(negative)".to_owned());
    let mk = |ft: FindingType, head: &str, reading: Option<String>, slots: Vec<ModifierSlot>| SlotTemplate {
        finding_type: ft,
        head: head.into(),
        polarity_slot: "polarity".into(),
        core_slot: "corefinding".into(),
        polarity_reading: reading,
        modifier_slots: slots,
    };

    let mut out = BTreeMap::new();
    out.insert(
        FindingType::AnatomicalFinding,
        mk(
            FindingType::AnatomicalFinding,
            "anatomicalfinding",
            present.clone(),
            full(),
        ),
    );
    out.insert(
        FindingType::Disease,
        mk(FindingType::Disease, "disease", present.clone(), full()),
    );
    out.insert(
        FindingType::Device,
        mk(FindingType::Device, "device", present.clone(), full()),
    );
    let tl_slots = [
        ModifierSlot::opaque("tubesandlines"),
        ModifierSlot::category(Subanatomy),
        ModifierSlot::renamed("tubesandlineslocation", Location),
    ]
    .into_iter()
    .chain(tail())
    .collect();
    out.insert(
        FindingType::TubesAndLines,
        mk(FindingType::TubesAndLines, "tubesandlines", present, tl_slots),
    );
    let tlf_slots = [
        ModifierSlot::category(AnatomyAffected),
        ModifierSlot::category(Subanatomy),
        ModifierSlot::renamed("tubesandlineslocation", Location),
    ]
    .into_iter()
    .chain(tail())
    .collect();
    out.insert(
        FindingType::TubesAndLinesFinding,
        mk(
            FindingType::TubesAndLinesFinding,
            "tubesandlinesfinding",
            Some("ill-placed(positive)/well-placed(negative)".into()),
            tlf_slots,
        ),
    );
    out.insert(
        FindingType::Viewpoint,
        SlotTemplate {
            finding_type: FindingType::Viewpoint,
            head: "views".into(),
            polarity_slot: "positive".into(),
            core_slot: "findingname".into(),
            polarity_reading: None,
            modifier_slots: Vec::new(),
        },
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn viewpoint_is_three_slots() {
        let t = &default_templates()[&FindingType::Viewpoint];
        assert_eq!(t.slot_order(), ["views", "positive", "findingname"]);
    }

    #[test]
    fn anatomical_finding_order() {
        let t = &default_templates()[&FindingType::AnatomicalFinding];
        assert_eq!(
            &t.slot_order()[..7],
            [
                "anatomicalfinding",
                "polarity",
                "corefinding",
                "anatomyaffected",
                "subanatomy",
                "location",
                "laterality"
            ]
        );
        assert_eq!(t.modifier_slots.len(), 14);
    }

    #[test]
    fn tubes_and_lines_finding_reads_placement() {
        let t = &default_templates()[&FindingType::TubesAndLinesFinding];
        assert_eq!(
            t.polarity_reading.as_deref(),
            Some("ill-placed(positive)/well-placed(negative)")
        );
        assert_eq!(t.modifier_slots[2].name, "tubesandlineslocation");
        assert_eq!(t.slot_for(ModifierCategory::Location), Some(2));
    }

    #[test]
    fn tubes_and_lines_has_opaque_slot_and_no_anatomy() {
        let t = &default_templates()[&FindingType::TubesAndLines];
        assert_eq!(t.modifier_slots[0], ModifierSlot::opaque("tubesandlines"));
        assert!(!t.permits(ModifierCategory::AnatomyAffected));
    }

    #[test]
    fn categories_at_most_once() {
        for t in default_templates().values() {
            let cats: Vec<_> = t.categories().collect();
            let set: BTreeSet<_> = cats.iter().collect();
            assert_eq!(cats.len(), set.len());
        }
    }

    #[test]
    fn duplicate_category_rejected() {
        let raw: TemplateFile = serde_json::from_value(serde_json::json!({
            "head": "disease", "polarity": "polarity", "core": "corefinding",
            "modifiers": ["location", {"slot": "loc2", "category": "location"}]
        }))
        .unwrap();
        assert!(SlotTemplate::from_file(FindingType::Disease, &raw).is_err());
    }
}
