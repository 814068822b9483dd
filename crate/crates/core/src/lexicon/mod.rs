//! Findings and modifier vocabulary.
//!
//! A [`Lexicon`] is loaded from a JSON file and validated once; after that it
//! is immutable and shared by every stage of the pipeline. It carries the core
//! findings (with synonyms, default anatomy and ontology parents), modifier
//! terms grouped by [`ModifierCategory`], one [`SlotTemplate`] per
//! [`FindingType`], the stopword list and the negation vocabularies.

mod template;

pub use template::{default_templates, ModifierSlot, SlotTemplate};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The six finding categories; every core finding carries exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FindingType {
    AnatomicalFinding,
    Disease,
    Device,
    TubesAndLines,
    TubesAndLinesFinding,
    Viewpoint,
}

impl FindingType {
    pub const ALL: [FindingType; 6] = [
        FindingType::AnatomicalFinding,
        FindingType::Disease,
        FindingType::Device,
        FindingType::TubesAndLines,
        FindingType::TubesAndLinesFinding,
        FindingType::Viewpoint,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FindingType::AnatomicalFinding => "anatomicalfinding",
            FindingType::Disease => "disease",
            FindingType::Device => "device",
            FindingType::TubesAndLines => "tubesandlines",
            FindingType::TubesAndLinesFinding => "tubesandlinesfinding",
            FindingType::Viewpoint => "viewpoint",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for FindingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Closed set of modifier categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModifierCategory {
    AnatomyAffected,
    Subanatomy,
    Location,
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
    Symptom,
}

impl ModifierCategory {
    pub const ALL: [ModifierCategory; 14] = [
        ModifierCategory::AnatomyAffected,
        ModifierCategory::Subanatomy,
        ModifierCategory::Location,
        ModifierCategory::Laterality,
        ModifierCategory::Severity,
        ModifierCategory::Size,
        ModifierCategory::Hedge,
        ModifierCategory::Character,
        ModifierCategory::Procedure,
        ModifierCategory::Shape,
        ModifierCategory::Correlation,
        ModifierCategory::Measure,
        ModifierCategory::Cause,
        ModifierCategory::Symptom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModifierCategory::AnatomyAffected => "anatomyaffected",
            ModifierCategory::Subanatomy => "subanatomy",
            ModifierCategory::Location => "location",
            ModifierCategory::Laterality => "laterality",
            ModifierCategory::Severity => "severity",
            ModifierCategory::Size => "size",
            ModifierCategory::Hedge => "hedge",
            ModifierCategory::Character => "character",
            ModifierCategory::Procedure => "procedure",
            ModifierCategory::Shape => "shape",
            ModifierCategory::Correlation => "correlation",
            ModifierCategory::Measure => "measure",
            ModifierCategory::Cause => "cause",
            ModifierCategory::Symptom => "symptom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for ModifierCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A whitespace-tokenized vocabulary phrase. Case is preserved.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phrase(Vec<String>);

impl Phrase {
    pub fn new(text: &str) -> Self {
        Phrase(text.split_whitespace().map(str::to_owned).collect())
    }

    pub fn words(&self) -> &[String] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Lowercased words.
    pub fn folded(&self) -> Vec<String> {
        self.0.iter().map(|w| w.to_lowercase()).collect()
    }
}

impl fmt::Display for Phrase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

impl From<&str> for Phrase {
    fn from(s: &str) -> Self {
        Phrase::new(s)
    }
}

impl Serialize for Phrase {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Phrase {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(Phrase::new(&s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreFinding {
    pub id: String,
    #[serde(rename = "name")]
    pub canonical_name: String,
    #[serde(rename = "type")]
    pub finding_type: FindingType,
    #[serde(default)]
    pub synonyms: Vec<Phrase>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_anatomy: Option<Phrase>,
    #[serde(rename = "parent", default, skip_serializing_if = "Option::is_none")]
    pub ontology_parent: Option<String>,
    /// Allows this finding's phrases to collide with another ambiguous finding.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub ambiguous: bool,
}

impl CoreFinding {
    /// Canonical name followed by every synonym.
    pub fn phrases(&self) -> impl Iterator<Item = Phrase> + '_ {
        std::iter::once(Phrase::new(&self.canonical_name)).chain(self.synonyms.iter().cloned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModifierTerm {
    pub category: ModifierCategory,
    pub phrase: Phrase,
    #[serde(default)]
    pub synonyms: Vec<Phrase>,
}

impl ModifierTerm {
    pub fn phrases(&self) -> impl Iterator<Item = &Phrase> + '_ {
        std::iter::once(&self.phrase).chain(self.synonyms.iter())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegationVocabulary {
    #[serde(default)]
    pub cues: Vec<Phrase>,
    #[serde(default)]
    pub prior: Vec<Phrase>,
    #[serde(default)]
    pub post: Vec<Phrase>,
}

/// On-disk shape of the lexicon file.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct LexiconFile {
    core_findings: Vec<CoreFinding>,
    #[serde(default)]
    modifiers: Vec<ModifierTerm>,
    #[serde(default)]
    templates: BTreeMap<FindingType, template::TemplateFile>,
    #[serde(default)]
    stopwords: Vec<String>,
    #[serde(default)]
    negation: NegationVocabulary,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed lexicon at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid lexicon:\n{}", format_issues(.0))]
    Validation(Vec<ValidationIssue>),
}

fn format_issues(issues: &[ValidationIssue]) -> String {
    issues.iter().map(|i| format!("  - {i}")).collect::<Vec<_>>().join("\n")
}

impl LexiconError {
    pub fn issues(&self) -> &[ValidationIssue] {
        match self {
            LexiconError::Validation(issues) => issues,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    pub core_findings: Vec<CoreFinding>,
    pub modifiers: Vec<ModifierTerm>,
    pub templates: BTreeMap<FindingType, SlotTemplate>,
    pub stopwords: BTreeSet<String>,
    pub negation: NegationVocabulary,
    by_id: HashMap<String, usize>,
    by_phrase: HashMap<Vec<String>, usize>,
}

/// Reads and validates a lexicon file.
pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Lexicon, LexiconError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Lexicon::from_json_str(&text)
}

impl Lexicon {
    pub fn from_json_str(text: &str) -> Result<Self, LexiconError> {
        let file: LexiconFile = serde_json::from_str(text).map_err(|e| LexiconError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::from_file(file)
    }

    fn from_file(file: LexiconFile) -> Result<Self, LexiconError> {
        let mut issues = Vec::new();
        let stopwords: BTreeSet<String> = file.stopwords.iter().map(|w| w.to_lowercase()).collect();

        let mut templates = BTreeMap::new();
        for (ft, raw) in &file.templates {
            match SlotTemplate::from_file(*ft, raw) {
                Ok(t) => {
                    templates.insert(*ft, t);
                }
                Err(message) => issues.push(ValidationIssue {
                    field: format!("templates.{ft}"),
                    message,
                }),
            }
        }
        let mut heads = BTreeMap::new();
        for t in templates.values() {
            if let Some(prev) = heads.insert(t.head.clone(), t.finding_type) {
                issues.push(ValidationIssue {
                    field: format!("templates.{}", t.finding_type),
                    message: format!("head word '{}' already used by {prev}", t.head),
                });
            }
        }
        for ft in FindingType::ALL {
            if !file.templates.contains_key(&ft) {
                issues.push(ValidationIssue {
                    field: "templates".into(),
                    message: format!("missing template for finding type {ft}"),
                });
            }
        }

        if file.core_findings.is_empty() {
            issues.push(ValidationIssue {
                field: "core_findings".into(),
                message: "no core findings".into(),
            });
        }

        let mut by_id = HashMap::new();
        let mut names = HashMap::new();
        for (i, cf) in file.core_findings.iter().enumerate() {
            let field = format!("core_findings[{i}]");
            if cf.id.trim().is_empty() {
                issues.push(issue(&field, "empty id"));
            } else if by_id.insert(cf.id.clone(), i).is_some() {
                issues.push(issue(&field, format!("duplicate id '{}'", cf.id)));
            }
            if cf.canonical_name.trim().is_empty() {
                issues.push(issue(&format!("{field}.name"), "empty name"));
            } else if let Some(prev) = names.insert(cf.canonical_name.to_lowercase(), i) {
                issues.push(issue(
                    &format!("{field}.name"),
                    format!(
                        "duplicate canonical name '{}' (also core_findings[{prev}])",
                        cf.canonical_name
                    ),
                ));
            }
            let mut seen = BTreeSet::new();
            seen.insert(Phrase::new(&cf.canonical_name).folded());
            for (j, syn) in cf.synonyms.iter().enumerate() {
                let f = format!("{field}.synonyms[{j}]");
                if syn.is_empty() {
                    issues.push(issue(&f, "empty synonym"));
                } else if !seen.insert(syn.folded()) {
                    issues.push(issue(&f, format!("duplicate synonym '{syn}'")));
                }
            }
            for p in cf.phrases() {
                check_label_safe(&p.to_string(), &field, &mut issues);
            }
            if let Some(a) = &cf.default_anatomy {
                if a.is_empty() {
                    issues.push(issue(&format!("{field}.default_anatomy"), "empty phrase"));
                }
                check_label_safe(&a.to_string(), &field, &mut issues);
            }
        }
        for (i, cf) in file.core_findings.iter().enumerate() {
            if let Some(parent) = &cf.ontology_parent {
                if !by_id.contains_key(parent) {
                    issues.push(issue(
                        &format!("core_findings[{i}].parent"),
                        format!("unknown parent id '{parent}'"),
                    ));
                }
            }
        }
        if let Some(cycle) = find_parent_cycle(&file.core_findings, &by_id) {
            issues.push(issue(
                "core_findings",
                format!("ontology parent cycle: {}", cycle.join(" -> ")),
            ));
        }

        let mut by_phrase: HashMap<Vec<String>, usize> = HashMap::new();
        for (i, cf) in file.core_findings.iter().enumerate() {
            for p in cf.phrases() {
                let key = normalize(p.words(), &stopwords);
                if key.is_empty() {
                    continue;
                }
                match by_phrase.get(&key) {
                    Some(&other) if other != i => {
                        let o = &file.core_findings[other];
                        if !(cf.ambiguous && o.ambiguous) {
                            issues.push(issue(
                                &format!("core_findings[{i}]"),
                                format!(
                                    "phrase '{p}' collides with core finding '{}'; mark both ambiguous to allow",
                                    o.id
                                ),
                            ));
                        }
                    }
                    Some(_) => {}
                    None => {
                        by_phrase.insert(key, i);
                    }
                }
            }
        }

        let mut modifier_keys = BTreeSet::new();
        for (i, m) in file.modifiers.iter().enumerate() {
            let field = format!("modifiers[{i}]");
            if m.phrase.is_empty() {
                issues.push(issue(&format!("{field}.phrase"), "empty phrase"));
            }
            if !modifier_keys.insert((m.category, m.phrase.folded())) {
                issues.push(issue(
                    &field,
                    format!("duplicate modifier '{}' in category {}", m.phrase, m.category),
                ));
            }
            for p in m.phrases() {
                if p.is_empty() {
                    issues.push(issue(&field, "empty synonym"));
                }
                check_label_safe(&p.to_string(), &field, &mut issues);
            }
        }

        for (name, list) in [
            ("cues", &file.negation.cues),
            ("prior", &file.negation.prior),
            ("post", &file.negation.post),
        ] {
            for (i, p) in list.iter().enumerate() {
                if p.is_empty() {
                    issues.push(issue(&format!("negation.{name}[{i}]"), "empty phrase"));
                }
            }
        }

        if !issues.is_empty() {
            return Err(LexiconError::Validation(issues));
        }
        Ok(Lexicon {
            core_findings: file.core_findings,
            modifiers: file.modifiers,
            templates,
            stopwords,
            negation: file.negation,
            by_id,
            by_phrase,
        })
    }

    fn to_file(&self) -> LexiconFile {
        LexiconFile {
            core_findings: self.core_findings.clone(),
            modifiers: self.modifiers.clone(),
            templates: self.templates.iter().map(|(ft, t)| (*ft, t.to_file())).collect(),
            stopwords: self.stopwords.iter().cloned().collect(),
            negation: self.negation.clone(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("lexicon serializes")
    }

    pub fn core(&self, id: &str) -> Option<&CoreFinding> {
        self.by_id.get(id).map(|&i| &self.core_findings[i])
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(&word.to_lowercase())
    }

    /// Finds the core finding whose name or synonym equals `phrase` after
    /// case-folding and stopword removal.
    pub fn lookup_core<S: AsRef<str>>(&self, phrase: &[S]) -> Option<&CoreFinding> {
        let key = normalize(phrase, &self.stopwords);
        self.by_phrase.get(&key).map(|&i| &self.core_findings[i])
    }

    pub fn allowed_modifiers(&self, ft: FindingType) -> &SlotTemplate {
        // Validation guarantees all six templates exist.
        &self.templates[&ft]
    }

    /// Walks `parent` links to the root core finding.
    pub fn roll_up(&self, id: &str) -> Option<&CoreFinding> {
        let mut current = self.core(id)?;
        let mut steps = 0;
        while let Some(parent) = &current.ontology_parent {
            current = self.core(parent)?;
            steps += 1;
            if steps > self.core_findings.len() {
                return None;
            }
        }
        Some(current)
    }

    /// Builds a lexicon in memory (used by tests and examples).
    pub fn builder() -> LexiconBuilder {
        LexiconBuilder::default()
    }
}

fn issue(field: &str, message: impl Into<String>) -> ValidationIssue {
    ValidationIssue {
        field: field.to_owned(),
        message: message.into(),
    }
}

fn check_label_safe(text: &str, field: &str, issues: &mut Vec<ValidationIssue>) {
    if text.contains('|') || text.contains(';') {
        issues.push(issue(field, format!("'{text}' contains a reserved label character")));
    }
}

/// Lowercases and drops stopwords.
pub fn normalize<S: AsRef<str>>(words: &[S], stopwords: &BTreeSet<String>) -> Vec<String> {
    words
        .iter()
        .map(|w| w.as_ref().to_lowercase())
        .filter(|w| !stopwords.contains(w))
        .collect()
}

fn find_parent_cycle(findings: &[CoreFinding], by_id: &HashMap<String, usize>) -> Option<Vec<String>> {
    // 0 = unvisited, 1 = on current path, 2 = done
    let mut state = vec![0u8; findings.len()];
    for start in 0..findings.len() {
        if state[start] != 0 {
            continue;
        }
        let mut path: Vec<usize> = Vec::new();
        let mut cur = Some(start);
        while let Some(i) = cur {
            match state[i] {
                1 => {
                    let pos = path.iter().position(|&p| p == i).unwrap_or(0);
                    let mut names: Vec<String> = path[pos..].iter().map(|&p| findings[p].id.clone()).collect();
                    names.push(findings[i].id.clone());
                    return Some(names);
                }
                2 => break,
                _ => {}
            }
            state[i] = 1;
            path.push(i);
            cur = findings[i].ontology_parent.as_ref().and_then(|p| by_id.get(p).copied());
        }
        for p in path {
            state[p] = 2;
        }
    }
    None
}

/// Incremental in-memory construction of a [`Lexicon`].
#[derive(Debug, Default, Clone)]
pub struct LexiconBuilder {
    file: Option<LexiconFileParts>,
}

#[derive(Debug, Default, Clone)]
struct LexiconFileParts {
    core_findings: Vec<CoreFinding>,
    modifiers: Vec<ModifierTerm>,
    templates: Option<BTreeMap<FindingType, SlotTemplate>>,
    stopwords: Vec<String>,
    negation: NegationVocabulary,
}

impl LexiconBuilder {
    fn parts(&mut self) -> &mut LexiconFileParts {
        self.file.get_or_insert_with(Default::default)
    }

    pub fn core(mut self, id: &str, name: &str, ft: FindingType, synonyms: &[&str]) -> Self {
        self.parts().core_findings.push(CoreFinding {
            id: id.into(),
            canonical_name: name.into(),
            finding_type: ft,
            synonyms: synonyms.iter().map(|s| Phrase::new(s)).collect(),
            default_anatomy: None,
            ontology_parent: None,
            ambiguous: false,
        });
        self
    }

    /// Sets the parent of the most recently added core finding.
    pub fn parent(mut self, parent: &str) -> Self {
        if let Some(cf) = self.parts().core_findings.last_mut() {
            cf.ontology_parent = Some(parent.into());
        }
        self
    }

    /// Sets the default anatomy of the most recently added core finding.
    pub fn default_anatomy(mut self, anatomy: &str) -> Self {
        if let Some(cf) = self.parts().core_findings.last_mut() {
            cf.default_anatomy = Some(Phrase::new(anatomy));
        }
        self
    }

    pub fn modifier(mut self, category: ModifierCategory, phrase: &str, synonyms: &[&str]) -> Self {
        self.parts().modifiers.push(ModifierTerm {
            category,
            phrase: Phrase::new(phrase),
            synonyms: synonyms.iter().map(|s| Phrase::new(s)).collect(),
        });
        self
    }

    pub fn stopwords(mut self, words: &[&str]) -> Self {
        self.parts().stopwords = words.iter().map(|w| w.to_string()).collect();
        self
    }

    pub fn negation(mut self, cues: &[&str], prior: &[&str], post: &[&str]) -> Self {
        let conv = |xs: &[&str]| xs.iter().map(|s| Phrase::new(s)).collect();
        self.parts().negation = NegationVocabulary {
            cues: conv(cues),
            prior: conv(prior),
            post: conv(post),
        };
        self
    }

    pub fn templates(mut self, templates: BTreeMap<FindingType, SlotTemplate>) -> Self {
        self.parts().templates = Some(templates);
        self
    }

    pub fn build(mut self) -> Result<Lexicon, LexiconError> {
        let parts = std::mem::take(self.parts());
        let templates = parts.templates.unwrap_or_else(default_templates);
        let file = LexiconFile {
            core_findings: parts.core_findings,
            modifiers: parts.modifiers,
            templates: templates.iter().map(|(ft, t)| (*ft, t.to_file())).collect(),
            stopwords: parts.stopwords,
            negation: parts.negation,
        };
        Lexicon::from_file(file)
    }
}
