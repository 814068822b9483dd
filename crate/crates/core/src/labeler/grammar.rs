//! Rendering and parsing of label strings.
//!
//! `head|polarity|core|slot1|slot2|...` with slots in template order,
//! multiple values in one slot joined by `;`, and trailing empty slots
//! dropped.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::lexicon::{FindingType, SlotTemplate};
use crate::negation::Polarity;

/// A label reduced to what its string carries.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LabelPattern {
    pub finding_type: FindingType,
    pub polarity: Polarity,
    pub core: String,
    /// One value list per template modifier slot.
    pub slots: Vec<Vec<String>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LabelParseError {
    #[error("label has fewer than three fields")]
    TooShort,
    #[error("unknown label head '{0}'")]
    UnknownHead(String),
    #[error("bad polarity '{0}'")]
    Polarity(String),
    #[error("empty core finding")]
    EmptyCore,
    #[error("{found} modifier slots but the {head} template has {expected}")]
    TooManySlots {
        head: String,
        expected: usize,
        found: usize,
    },
    #[error("empty value in slot {0}")]
    EmptyValue(String),
}

impl LabelPattern {
    pub fn new(finding_type: FindingType, polarity: Polarity, core: &str, template: &SlotTemplate) -> Self {
        LabelPattern {
            finding_type,
            polarity,
            core: core.to_owned(),
            slots: vec![Vec::new(); template.modifier_slots.len()],
        }
    }

    pub fn render(&self, template: &SlotTemplate) -> String {
        let mut fields = vec![
            template.head.clone(),
            self.polarity.as_str().to_owned(),
            self.core.clone(),
        ];
        fields.extend(self.slots.iter().map(|v| v.join(";")));
        while fields.len() > 3 && fields.last().is_some_and(String::is_empty) {
            fields.pop();
        }
        fields.join("|")
    }

    /// Slot name → values, nonempty slots only.
    pub fn named_slots(&self, template: &SlotTemplate) -> BTreeMap<String, Vec<String>> {
        template
            .modifier_slots
            .iter()
            .zip(&self.slots)
            .filter(|(_, v)| !v.is_empty())
            .map(|(s, v)| (s.name.clone(), v.clone()))
            .collect()
    }
}

pub fn parse_label(
    label: &str,
    templates: &BTreeMap<FindingType, SlotTemplate>,
) -> Result<LabelPattern, LabelParseError> {
    let fields: Vec<&str> = label.split('|').collect();
    if fields.len() < 3 {
        return Err(LabelParseError::TooShort);
    }
    let template = templates
        .values()
        .find(|t| t.head == fields[0])
        .ok_or_else(|| LabelParseError::UnknownHead(fields[0].to_owned()))?;
    let polarity = Polarity::parse(fields[1]).ok_or_else(|| LabelParseError::Polarity(fields[1].to_owned()))?;
    if fields[2].is_empty() {
        return Err(LabelParseError::EmptyCore);
    }
    let raw = &fields[3..];
    if raw.len() > template.modifier_slots.len() {
        return Err(LabelParseError::TooManySlots {
            head: template.head.clone(),
            expected: template.modifier_slots.len(),
            found: raw.len(),
        });
    }
    let mut pattern = LabelPattern::new(template.finding_type, polarity, fields[2], template);
    for (k, field) in raw.iter().enumerate() {
        if field.is_empty() {
            continue;
        }
        let values: Vec<String> = field.split(';').map(str::to_owned).collect();
        if values.iter().any(String::is_empty) {
            return Err(LabelParseError::EmptyValue(template.modifier_slots[k].name.clone()));
        }
        pattern.slots[k] = values;
    }
    Ok(pattern)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{default_templates, ModifierCategory};
    use proptest::prelude::*;

    #[test]
    fn trailing_slots_trimmed() {
        let t = default_templates();
        let af = &t[&FindingType::AnatomicalFinding];
        let p = LabelPattern::new(FindingType::AnatomicalFinding, Polarity::Yes, "scarring", af);
        assert_eq!(p.render(af), "anatomicalfinding|yes|scarring");
    }

    #[test]
    fn multi_values_and_inner_blanks() {
        let t = default_templates();
        let af = &t[&FindingType::AnatomicalFinding];
        let mut p = LabelPattern::new(FindingType::AnatomicalFinding, Polarity::Yes, "streaky opacity", af);
        p.slots[af.slot_for(ModifierCategory::AnatomyAffected).unwrap()] = vec!["base".into()];
        p.slots[af.slot_for(ModifierCategory::Location).unwrap()] = vec!["left".into(), "base".into()];
        p.slots[af.slot_for(ModifierCategory::Laterality).unwrap()] = vec!["left".into()];
        p.slots[af.slot_for(ModifierCategory::Character).unwrap()] = vec!["streaky".into()];
        let s = p.render(af);
        assert_eq!(
            s,
            "anatomicalfinding|yes|streaky opacity|base||left;base|left||||streaky"
        );
        assert_eq!(parse_label(&s, &t).unwrap(), p);
    }

    #[test]
    fn viewpoint_three_fields() {
        let t = default_templates();
        let vp = &t[&FindingType::Viewpoint];
        let p = LabelPattern::new(FindingType::Viewpoint, Polarity::Yes, "apical lordotic", vp);
        assert_eq!(p.render(vp), "views|yes|apical lordotic");
    }

    #[test]
    fn parse_errors() {
        let t = default_templates();
        assert_eq!(parse_label("views|yes", &t), Err(LabelParseError::TooShort));
        assert!(matches!(
            parse_label("nope|yes|x", &t),
            Err(LabelParseError::UnknownHead(_))
        ));
        assert!(matches!(
            parse_label("views|maybe|x", &t),
            Err(LabelParseError::Polarity(_))
        ));
        assert!(matches!(
            parse_label("views|yes|x|y", &t),
            Err(LabelParseError::TooManySlots { .. })
        ));
        assert!(matches!(
            parse_label("disease|no|x|a;;b", &t),
            Err(LabelParseError::EmptyValue(_))
        ));
        assert_eq!(parse_label("disease|no|", &t), Err(LabelParseError::EmptyCore));
    }

    fn arb_pattern() -> impl Strategy<Value = LabelPattern> {
        let t = default_templates();
        let types: Vec<FindingType> = FindingType::ALL.to_vec();
        (prop::sample::select(types), any::<bool>(), "[a-z][a-z /-]{0,12}")
            .prop_flat_map(move |(ft, yes, core)| {
                let n = t[&ft].modifier_slots.len();
                let slots = prop::collection::vec(prop::collection::vec("[a-z][a-z ]{0,8}", 0..3), n);
                (Just(ft), Just(yes), Just(core), slots)
            })
            .prop_map(|(ft, yes, core, slots)| LabelPattern {
                finding_type: ft,
                polarity: if yes { Polarity::Yes } else { Polarity::No },
                core,
                slots,
            })
    }

    proptest! {
        #[test]
        fn render_parse_render(p in arb_pattern()) {
            let t = default_templates();
            let tpl = &t[&p.finding_type];
            let s = p.render(tpl);
            let back = parse_label(&s, &t).unwrap();
            prop_assert_eq!(&back, &p);
            prop_assert_eq!(back.render(tpl), s);
        }
    }
}
