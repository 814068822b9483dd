//! Report segmentation: sections, sentences and tokens.
//!
//! Offsets are byte offsets into the report text so extracted labels can be
//! traced back to their source.

use std::fmt;
use std::ops::Range;

use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub report_id: String,
    pub text: String,
    #[serde(default)]
    pub image_ids: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SectionKind {
    Findings,
    Impression,
    Other,
}

impl fmt::Display for SectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SectionKind::Findings => "findings",
            SectionKind::Impression => "impression",
            SectionKind::Other => "other",
        })
    }
}

/// A section body; `heading` covers the heading word(s) and colon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub kind: SectionKind,
    pub heading: Option<Range<usize>>,
    pub span: Range<usize>,
}

impl Section {
    pub fn text<'a>(&self, report_text: &'a str) -> &'a str {
        &report_text[self.span.clone()]
    }
}

#[derive(Debug, Clone)]
pub struct SectionConfig {
    headings: Vec<(String, SectionKind)>,
    pattern: Regex,
}

impl SectionConfig {
    /// `headings` are matched case-insensitively and must be followed by a colon.
    pub fn new(headings: Vec<(String, SectionKind)>) -> Self {
        let mut names: Vec<String> = headings.iter().map(|(h, _)| normalize_heading(h)).collect();
        names.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        names.dedup();
        let alternation = names
            .iter()
            .map(|n| n.split(' ').map(regex::escape).collect::<Vec<_>>().join(r"\s+"))
            .collect::<Vec<_>>()
            .join("|");
        let pattern = if alternation.is_empty() {
            Regex::new(r"[^\s\S]").expect("never-matching regex")
        } else {
            Regex::new(&format!(r"(?i)\b({alternation})[ \t]*:")).expect("heading regex")
        };
        let headings = headings.into_iter().map(|(h, k)| (normalize_heading(&h), k)).collect();
        SectionConfig { headings, pattern }
    }

    fn kind_of(&self, heading: &str) -> SectionKind {
        let h = normalize_heading(heading);
        self.headings
            .iter()
            .find(|(name, _)| *name == h)
            .map(|(_, k)| *k)
            .unwrap_or(SectionKind::Other)
    }
}

fn normalize_heading(h: &str) -> String {
    h.split_whitespace()
        .map(|w| w.to_uppercase())
        .collect::<Vec<_>>()
        .join(" ")
}

impl Default for SectionConfig {
    fn default() -> Self {
        use SectionKind::*;
        let table: &[(&str, SectionKind)] = &[
            ("FINDINGS", Findings),
            ("FINDING", Findings),
            ("FINDINGS AND IMPRESSION", Findings),
            ("IMPRESSION", Impression),
            ("IMPRESSIONS", Impression),
            ("CONCLUSION", Impression),
            ("CONCLUSIONS", Impression),
            ("OPINION", Impression),
            ("INDICATION", Other),
            ("INDICATIONS", Other),
            ("HISTORY", Other),
            ("CLINICAL HISTORY", Other),
            ("CLINICAL INFORMATION", Other),
            ("COMPARISON", Other),
            ("COMPARISONS", Other),
            ("TECHNIQUE", Other),
            ("EXAMINATION", Other),
            ("EXAM", Other),
            ("REASON FOR EXAM", Other),
            ("REASON FOR EXAMINATION", Other),
            ("NOTIFICATION", Other),
            ("RECOMMENDATION", Other),
            ("RECOMMENDATIONS", Other),
            ("ADDENDUM", Other),
        ];
        SectionConfig::new(table.iter().map(|(h, k)| (h.to_string(), *k)).collect())
    }
}

/// Splits report text at section headings. Text before the first heading is
/// `other`; sections with blank bodies are dropped.
pub fn segment_sections(text: &str, config: &SectionConfig) -> Vec<Section> {
    let mut out = Vec::new();
    let mut cursor = 0;
    let mut current_kind = SectionKind::Other;
    let mut current_heading = None;
    for caps in config.pattern.captures_iter(text) {
        let whole = caps.get(0).expect("match");
        push_section(
            &mut out,
            text,
            current_kind,
            current_heading.take(),
            cursor..whole.start(),
        );
        current_kind = config.kind_of(&caps[1]);
        current_heading = Some(whole.start()..whole.end());
        cursor = whole.end();
    }
    push_section(&mut out, text, current_kind, current_heading, cursor..text.len());
    out
}

fn push_section(
    out: &mut Vec<Section>,
    text: &str,
    kind: SectionKind,
    heading: Option<Range<usize>>,
    range: Range<usize>,
) {
    let slice = &text[range.clone()];
    let lead = slice.len() - slice.trim_start().len();
    let trail = slice.len() - slice.trim_end().len();
    if lead == slice.len() {
        return;
    }
    out.push(Section {
        kind,
        heading,
        span: range.start + lead..range.end - trail,
    });
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub report_id: String,
    pub section: SectionKind,
    /// Position among all sentences of the report, across sections.
    pub index: usize,
    pub tokens: Vec<Token>,
    pub char_span: (usize, usize),
}

impl Sentence {
    /// Builds a free-standing sentence from raw text (report id empty).
    pub fn from_text(text: &str) -> Self {
        Sentence {
            report_id: String::new(),
            section: SectionKind::Other,
            index: 0,
            tokens: tokenize(text, 0),
            char_span: (0, text.len()),
        }
    }

    pub fn words(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.text.as_str()).collect()
    }

    pub fn folded_words(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.text.to_lowercase()).collect()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Splits words on whitespace and punctuation. Hyphens inside a word are
/// kept, as are `.`/`,` between digits; everything else is a separator.
pub fn tokenize(text: &str, base: usize) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let is_digit_at = |k: usize| chars.get(k).is_some_and(|(_, c)| c.is_ascii_digit());
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for k in 0..=chars.len() {
        let keep = match chars.get(k) {
            None => false,
            Some(&(_, c)) if c.is_alphanumeric() || c == '-' => true,
            Some(&(_, '.')) | Some(&(_, ',')) => k > 0 && is_digit_at(k - 1) && is_digit_at(k + 1),
            Some(_) => false,
        };
        match (keep, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                let from = chars[s].0;
                let to = chars.get(k).map_or(text.len(), |(i, _)| *i);
                push_token(&mut tokens, &text[from..to], base + from);
                start = None;
            }
            _ => {}
        }
    }
    tokens
}

fn push_token(tokens: &mut Vec<Token>, raw: &str, offset: usize) {
    let trimmed = raw.trim_start_matches('-');
    let lead = raw.len() - trimmed.len();
    let word = trimmed.trim_end_matches('-');
    if word.is_empty() {
        return;
    }
    tokens.push(Token {
        text: word.to_owned(),
        start: offset + lead,
        end: offset + lead + word.len(),
    });
}

const ABBREVIATIONS: &[&str] = &["dr", "mr", "mrs", "ms", "vs", "e.g", "i.e", "approx", "cf", "fig", "st"];

/// Splits section text into sentences at `.`, `?` and `!` followed by
/// whitespace or end of text. Offsets are relative to `text`.
pub fn split_sentences(text: &str) -> Vec<Sentence> {
    split_with_offsets(text, 0, "", SectionKind::Other, 0)
}

fn split_with_offsets(
    text: &str,
    base: usize,
    report_id: &str,
    section: SectionKind,
    first_index: usize,
) -> Vec<Sentence> {
    let mut bounds: Vec<Range<usize>> = Vec::new();
    let mut start = 0;
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if matches!(b, b'.' | b'?' | b'!') {
            let mut end = i + 1;
            while end < bytes.len() && matches!(bytes[end], b'.' | b'?' | b'!') {
                end += 1;
            }
            let at_boundary = end == bytes.len() || (bytes[end] as char).is_whitespace();
            if at_boundary && !(b == b'.' && end == i + 1 && guarded(text, start, i, end)) {
                bounds.push(start..end);
                start = end;
            }
            i = end;
        } else {
            i += 1;
        }
    }
    if start < text.len() {
        bounds.push(start..text.len());
    }

    let mut out: Vec<Sentence> = Vec::new();
    let mut pending: Option<usize> = None;
    for r in bounds {
        let slice = &text[r.clone()];
        let lead = slice.len() - slice.trim_start().len();
        let s = pending.take().unwrap_or(r.start + lead);
        let e = r.start + slice.trim_end().len();
        if s >= e {
            continue;
        }
        let tokens = tokenize(&text[s..e], base + s);
        if tokens.is_empty() {
            match out.last_mut() {
                Some(prev) => prev.char_span.1 = base + e,
                None => pending = Some(s),
            }
            continue;
        }
        out.push(Sentence {
            report_id: report_id.to_owned(),
            section,
            index: first_index + out.len(),
            tokens,
            char_span: (base + s, base + e),
        });
    }
    out
}

/// True when the period at `dot` should not end a sentence.
fn guarded(text: &str, sentence_start: usize, dot: usize, after: usize) -> bool {
    let before = &text[sentence_start..dot];
    let word = before
        .rsplit(|c: char| c.is_whitespace())
        .next()
        .unwrap_or("")
        .trim_start_matches(|c: char| !c.is_alphanumeric());
    let lower = word.to_lowercase();
    if ABBREVIATIONS.contains(&lower.as_str()) {
        return true;
    }
    // A bare list number such as "1." opening a sentence.
    if before.trim().chars().all(|c| c.is_ascii_digit()) && !before.trim().is_empty() {
        return true;
    }
    // Initials: "J. Smith". A following single letter ("A. B.") still splits.
    let mut wc = word.chars();
    if let (Some(c), None) = (wc.next(), wc.next()) {
        if c.is_alphabetic() && c.is_uppercase() {
            let next_word: String = text[after..]
                .trim_start()
                .chars()
                .take_while(|c| c.is_alphabetic())
                .collect();
            let mut nc = next_word.chars();
            if nc.next().is_some_and(|c| c.is_uppercase()) && next_word.chars().count() >= 2 {
                return true;
            }
        }
    }
    false
}

/// Every sentence of the report, in text order, numbered across sections.
pub fn report_sentences(report: &Report, config: &SectionConfig) -> Vec<Sentence> {
    let mut out = Vec::new();
    for section in segment_sections(&report.text, config) {
        let body = section.text(&report.text);
        let next = out.len();
        out.extend(split_with_offsets(
            body,
            section.span.start,
            &report.report_id,
            section.kind,
            next,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sections(text: &str) -> Vec<(SectionKind, &str)> {
        segment_sections(text, &SectionConfig::default())
            .iter()
            .map(|s| (s.kind, &text[s.span.clone()]))
            .collect()
    }

    #[test]
    fn findings_and_impression() {
        assert_eq!(
            sections("FINDINGS: A. IMPRESSION: B."),
            vec![(SectionKind::Findings, "A."), (SectionKind::Impression, "B.")]
        );
    }

    #[test]
    fn empty_and_headingless() {
        assert!(sections("").is_empty());
        assert_eq!(
            sections("no headings here."),
            vec![(SectionKind::Other, "no headings here.")]
        );
    }

    #[test]
    fn heading_case_and_preamble() {
        assert_eq!(
            sections("Exam: chest.\nfindings:\n clear lungs.\nImpression : normal."),
            vec![
                (SectionKind::Other, "chest."),
                (SectionKind::Findings, "clear lungs."),
                (SectionKind::Impression, "normal.")
            ]
        );
        assert_eq!(
            sections("Some preamble. CLINICAL HISTORY: cough."),
            vec![(SectionKind::Other, "Some preamble."), (SectionKind::Other, "cough.")]
        );
    }

    #[test]
    fn custom_headings() {
        let cfg = SectionConfig::new(vec![("Befund".into(), SectionKind::Findings)]);
        let s = segment_sections("x. BEFUND: y.", &cfg);
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].kind, SectionKind::Findings);
    }

    #[test]
    fn table_four_sentence_tokens() {
        let s = split_sentences("Marked aortic sclerosis present with evidence of stenosis.");
        assert_eq!(s.len(), 1);
        assert_eq!(
            s[0].words(),
            [
                "Marked",
                "aortic",
                "sclerosis",
                "present",
                "with",
                "evidence",
                "of",
                "stenosis"
            ]
        );
    }

    #[test]
    fn two_single_letter_sentences() {
        assert_eq!(split_sentences("A. B.").len(), 2);
    }

    #[test]
    fn vertebral_level_does_not_split() {
        let s = split_sentences("seen at C4-5 with contrast.");
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].words(), ["seen", "at", "C4-5", "with", "contrast"]);
    }

    #[test]
    fn guards() {
        assert_eq!(split_sentences("Seen by Dr. Smith today. Stable.").len(), 2);
        assert_eq!(split_sentences("Read by J. Smith. Stable.").len(), 2);
        assert_eq!(split_sentences("Nodule measures 3.5 cm. Stable.").len(), 2);
        assert_eq!(split_sentences("1. No effusion. 2. No pneumothorax.").len(), 2);
        assert_eq!(split_sentences("Effusion? Likely.").len(), 2);
    }

    #[test]
    fn tokenizer_rules() {
        let toks: Vec<_> = tokenize("Left Atrium: -- cyst/bullae, 1,000 x-ray's", 0)
            .into_iter()
            .map(|t| t.text)
            .collect();
        assert_eq!(toks, ["Left", "Atrium", "cyst", "bullae", "1,000", "x-ray", "s"]);
    }

    #[test]
    fn offsets_point_into_report() {
        let r = Report {
            report_id: "r1".into(),
            text: "INDICATION: cough. FINDINGS: No effusion. Mild edema.".into(),
            image_ids: vec![],
        };
        let s = report_sentences(&r, &SectionConfig::default());
        assert_eq!(s.len(), 3);
        assert_eq!(s[1].section, SectionKind::Findings);
        assert_eq!(s[2].index, 2);
        let (a, b) = s[2].char_span;
        assert_eq!(&r.text[a..b], "Mild edema.");
        let t = &s[1].tokens[1];
        assert_eq!(&r.text[t.start..t.end], "effusion");
    }

    #[test]
    fn punctuation_only_fragment_joins_previous() {
        let s = split_sentences("Clear. ... Stable.");
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].char_span, (0, 10));
    }
}
