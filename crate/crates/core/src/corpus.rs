//! Corpus runs, label catalogs and support filtering.
//!
//! A [`LabelCatalog`] keeps, for every rendered label, the sentences, reports
//! and images it came from. Merging two catalogs is a set union, so mining a
//! corpus in pieces and merging gives the same catalog as mining it whole.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, BufRead, Read};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labeler::{FineGrainedLabel, Polarity};
use crate::lexicon::FindingType;
use crate::parsegraph::ParseStore;
use crate::pipeline::{Extractor, ReportExtraction};
use crate::textprep::Report;

/// Report id → image ids.
pub type Manifest = BTreeMap<String, BTreeSet<String>>;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("manifest: {0}")]
    Csv(#[from] csv::Error),
    #[error("manifest header must be report_id,image_id, found {0:?}")]
    Header(Vec<String>),
    #[error("manifest line {line}: empty report_id or image_id")]
    Empty { line: u64 },
}

/// Reads a `report_id,image_id` CSV. Any malformed row fails the whole read.
pub fn read_manifest(reader: impl Read) -> Result<Manifest, ManifestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != ["report_id", "image_id"] {
        return Err(ManifestError::Header(header));
    }
    let mut out = Manifest::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let (Some(r), Some(i)) = (row.get(0), row.get(1)) else {
            return Err(ManifestError::Empty { line });
        };
        if r.is_empty() || i.is_empty() {
            return Err(ManifestError::Empty { line });
        }
        out.entry(r.to_owned()).or_default().insert(i.to_owned());
    }
    Ok(out)
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(reader: impl BufRead, what: &str) -> io::Result<(Vec<T>, Vec<String>)> {
    let mut items = Vec::new();
    let mut diagnostics = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(v) => items.push(v),
            Err(e) => diagnostics.push(format!("line {}: bad {what} record skipped: {e}", k + 1)),
        }
    }
    Ok((items, diagnostics))
}

/// Reports, one JSON object per line. Bad lines are skipped and reported.
pub fn read_reports(reader: impl BufRead) -> io::Result<(Vec<Report>, Vec<String>)> {
    read_jsonl(reader, "report")
}

/// Label records as written by extraction.
pub fn read_labels(reader: impl BufRead) -> io::Result<(Vec<FineGrainedLabel>, Vec<String>)> {
    read_jsonl(reader, "label")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub reports: usize,
    pub sentences_processed: usize,
    pub sentences_with_finding: usize,
    pub sentences_skipped: usize,
}

impl Totals {
    fn add(&mut self, other: &Totals) {
        self.reports += other.reports;
        self.sentences_processed += other.sentences_processed;
        self.sentences_with_finding += other.sentences_with_finding;
        self.sentences_skipped += other.sentences_skipped;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct LabelEntry {
    finding_type: FindingType,
    polarity: Polarity,
    sentences: BTreeSet<(String, usize)>,
    reports: BTreeSet<String>,
    images: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelCatalog {
    totals: Totals,
    entries: BTreeMap<String, LabelEntry>,
}

/// Images a report contributes: manifest entries plus the report's own ids.
/// A report with none counts as one image named after the report.
pub fn report_images(report_id: &str, own: &[String], manifest: Option<&Manifest>) -> BTreeSet<String> {
    let mut images: BTreeSet<String> = own.iter().cloned().collect();
    if let Some(m) = manifest.and_then(|m| m.get(report_id)) {
        images.extend(m.iter().cloned());
    }
    if images.is_empty() {
        images.insert(report_id.to_owned());
    }
    images
}

impl LabelCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn totals(&self) -> Totals {
        self.totals
    }

    pub fn set_totals(&mut self, totals: Totals) {
        self.totals = totals;
    }

    pub fn add_label(&mut self, label: &FineGrainedLabel, images: &BTreeSet<String>) {
        let e = self.entries.entry(label.label.clone()).or_insert_with(|| LabelEntry {
            finding_type: label.finding_type,
            polarity: label.polarity,
            sentences: BTreeSet::new(),
            reports: BTreeSet::new(),
            images: BTreeSet::new(),
        });
        e.sentences.insert((label.report_id.clone(), label.sentence_index));
        e.reports.insert(label.report_id.clone());
        e.images.extend(images.iter().cloned());
    }

    pub fn add_report(&mut self, ex: &ReportExtraction, manifest: Option<&Manifest>) {
        let images = report_images(&ex.report_id, &ex.image_ids, manifest);
        for l in &ex.labels {
            self.add_label(l, &images);
        }
        self.totals.add(&Totals {
            reports: 1,
            sentences_processed: ex.sentences_processed,
            sentences_with_finding: ex.sentences_with_finding,
            sentences_skipped: ex.sentences_skipped,
        });
    }

    /// Catalog from a label stream. Totals count reports and sentences that
    /// carry labels; sentences without labels are not visible here.
    pub fn from_labels(labels: &[FineGrainedLabel], manifest: Option<&Manifest>) -> Self {
        let mut cat = LabelCatalog::new();
        let mut sentences = BTreeSet::new();
        let mut reports = BTreeSet::new();
        for l in labels {
            let images = report_images(&l.report_id, &[], manifest);
            cat.add_label(l, &images);
            sentences.insert((l.report_id.as_str(), l.sentence_index));
            reports.insert(l.report_id.as_str());
        }
        cat.totals = Totals {
            reports: reports.len(),
            sentences_processed: sentences.len(),
            sentences_with_finding: sentences.len(),
            sentences_skipped: 0,
        };
        cat
    }

    /// Union of two catalogs over disjoint corpora.
    pub fn merge(mut self, other: LabelCatalog) -> LabelCatalog {
        self.totals.add(&other.totals);
        for (label, o) in other.entries {
            match self.entries.get_mut(&label) {
                Some(e) => {
                    e.sentences.extend(o.sentences);
                    e.reports.extend(o.reports);
                    e.images.extend(o.images);
                }
                None => {
                    self.entries.insert(label, o);
                }
            }
        }
        self
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn counts(&self) -> CatalogCounts {
        CatalogCounts {
            totals: self.totals,
            labels: self
                .entries
                .iter()
                .map(|(k, e)| {
                    (
                        k.clone(),
                        LabelCounts {
                            finding_type: e.finding_type,
                            polarity: e.polarity,
                            sentence_count: e.sentences.len(),
                            report_count: e.reports.len(),
                            image_support: e.images.len(),
                        },
                    )
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    #[serde(rename = "type")]
    pub finding_type: FindingType,
    pub polarity: Polarity,
    pub sentence_count: usize,
    pub report_count: usize,
    pub image_support: usize,
}

/// The persisted form of a catalog.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogCounts {
    pub totals: Totals,
    pub labels: BTreeMap<String, LabelCounts>,
}

impl CatalogCounts {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("catalog serializes")
    }
}

/// Labels with at least `min_support` images, by support then label.
pub fn filter_support(counts: &CatalogCounts, min_support: usize) -> Vec<(String, usize)> {
    let mut out: Vec<(String, usize)> = counts
        .labels
        .iter()
        .filter(|(_, c)| c.image_support >= min_support)
        .map(|(l, c)| (l.clone(), c.image_support))
        .collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageStats {
    pub reports: usize,
    pub sentences_processed: usize,
    pub sentences_with_finding: usize,
    pub sentences_skipped: usize,
    /// `None` when no sentence was processed.
    pub finding_fraction: Option<f64>,
    pub label_count: usize,
    pub by_type: BTreeMap<String, usize>,
    pub by_polarity: BTreeMap<String, usize>,
}

pub fn coverage_stats(counts: &CatalogCounts) -> CoverageStats {
    let t = counts.totals;
    let mut by_type = BTreeMap::new();
    let mut by_polarity = BTreeMap::new();
    for c in counts.labels.values() {
        *by_type.entry(c.finding_type.as_str().to_owned()).or_insert(0) += 1;
        *by_polarity.entry(c.polarity.as_str().to_owned()).or_insert(0) += 1;
    }
    CoverageStats {
        reports: t.reports,
        sentences_processed: t.sentences_processed,
        sentences_with_finding: t.sentences_with_finding,
        sentences_skipped: t.sentences_skipped,
        finding_fraction: (t.sentences_processed > 0)
            .then(|| t.sentences_with_finding as f64 / t.sentences_processed as f64),
        label_count: counts.labels.len(),
        by_type,
        by_polarity,
    }
}

impl fmt::Display for CoverageStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "reports:                 {}", self.reports)?;
        writeln!(f, "sentences processed:     {}", self.sentences_processed)?;
        match self.finding_fraction {
            Some(x) => writeln!(
                f,
                "sentences with findings: {} ({:.1}%)",
                self.sentences_with_finding,
                100.0 * x
            )?,
            None => writeln!(f, "sentences with findings: {} (n/a)", self.sentences_with_finding)?,
        }
        writeln!(f, "sentences skipped:       {}", self.sentences_skipped)?;
        writeln!(f, "distinct labels:         {}", self.label_count)?;
        for (title, hist) in [("by type", &self.by_type), ("by polarity", &self.by_polarity)] {
            writeln!(f, "{title}:")?;
            for (k, v) in hist {
                writeln!(f, "  {k:<22} {v}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct MiningOutput {
    /// Ordered by report id, then sentence index.
    pub labels: Vec<FineGrainedLabel>,
    pub catalog: LabelCatalog,
    pub diagnostics: Vec<String>,
}

/// Extracts every report on `jobs` threads (0 = one per core) and builds the
/// catalog. Output does not depend on report order or thread count.
pub fn mine_corpus(
    extractor: &Extractor,
    reports: &[Report],
    parses: Option<&ParseStore>,
    manifest: Option<&Manifest>,
    jobs: usize,
) -> MiningOutput {
    let run = || -> Vec<ReportExtraction> {
        reports
            .par_iter()
            .map(|r| extractor.extract_report(r, parses))
            .collect()
    };
    let mut results = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(run),
        Err(e) => {
            log::warn!("thread pool unavailable ({e}), running on the global pool");
            run()
        }
    };
    results.sort_by(|a, b| a.report_id.cmp(&b.report_id));

    let mut out = MiningOutput::default();
    for ex in &results {
        out.catalog.add_report(ex, manifest);
        out.diagnostics.extend(ex.diagnostics.iter().cloned());
    }
    out.labels = results.into_iter().flat_map(|ex| ex.labels).collect();
    out.labels
        .sort_by(|a, b| (&a.report_id, a.sentence_index).cmp(&(&b.report_id, b.sentence_index)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label(report: &str, sentence: usize, text: &str, polarity: Polarity) -> FineGrainedLabel {
        FineGrainedLabel {
            report_id: report.into(),
            sentence_index: sentence,
            label: text.into(),
            finding_type: FindingType::AnatomicalFinding,
            polarity,
            core: "x".into(),
            slots: BTreeMap::new(),
            spans: vec![],
        }
    }

    fn counts_with(supports: &[(&str, usize)]) -> CatalogCounts {
        CatalogCounts {
            totals: Totals::default(),
            labels: supports
                .iter()
                .map(|(l, s)| {
                    (
                        l.to_string(),
                        LabelCounts {
                            finding_type: FindingType::Disease,
                            polarity: Polarity::Yes,
                            sentence_count: *s,
                            report_count: *s,
                            image_support: *s,
                        },
                    )
                })
                .collect(),
        }
    }

    #[test]
    fn filter_boundary_and_order() {
        let c = counts_with(&[("A", 150), ("B", 99), ("C", 100)]);
        assert_eq!(
            filter_support(&c, 100),
            [("A".to_string(), 150), ("C".to_string(), 100)]
        );
        assert_eq!(filter_support(&c, 0).len(), 3);
        let tie = counts_with(&[("b", 5), ("a", 5)]);
        assert_eq!(filter_support(&tie, 1)[0].0, "a");
    }

    #[test]
    fn manifest_parsing() {
        let m = read_manifest("report_id,image_id\nr1,a\nr1,b\nr2,c\n".as_bytes()).unwrap();
        assert_eq!(m["r1"].len(), 2);
        assert!(matches!(
            read_manifest("id,img\nr1,a\n".as_bytes()),
            Err(ManifestError::Header(_))
        ));
        assert!(read_manifest("report_id,image_id\nr1\n".as_bytes()).is_err());
        assert!(matches!(
            read_manifest("report_id,image_id\nr1,\n".as_bytes()),
            Err(ManifestError::Empty { .. })
        ));
    }

    #[test]
    fn images_are_counted_distinctly() {
        let manifest = read_manifest("report_id,image_id\nr1,a\nr1,b\nr2,b\n".as_bytes()).unwrap();
        let labels = [
            label("r1", 0, "L", Polarity::Yes),
            label("r1", 1, "L", Polarity::Yes),
            label("r2", 0, "L", Polarity::Yes),
            label("r3", 0, "L", Polarity::Yes),
        ];
        let c = LabelCatalog::from_labels(&labels, Some(&manifest)).counts();
        let l = c.labels["L"];
        assert_eq!((l.sentence_count, l.report_count, l.image_support), (4, 3, 3));
    }

    #[test]
    fn merge_is_union() {
        let a = LabelCatalog::from_labels(&[label("r1", 0, "L", Polarity::No)], None);
        let b = LabelCatalog::from_labels(&[label("r2", 0, "L", Polarity::No)], None);
        let whole = LabelCatalog::from_labels(
            &[label("r1", 0, "L", Polarity::No), label("r2", 0, "L", Polarity::No)],
            None,
        );
        assert_eq!(a.clone().merge(b.clone()), whole);
        assert_eq!(b.merge(a), whole);
    }

    #[test]
    fn empty_catalog_stats() {
        let s = coverage_stats(&LabelCatalog::new().counts());
        assert_eq!(s.finding_fraction, None);
        assert_eq!(s.label_count, 0);
        assert!(s.to_string().contains("n/a"));
    }

    #[test]
    fn stats_fraction_and_histograms() {
        let mut cat = LabelCatalog::from_labels(
            &[label("r", 0, "a", Polarity::Yes), label("r", 0, "b", Polarity::No)],
            None,
        );
        cat.set_totals(Totals {
            reports: 1,
            sentences_processed: 10,
            sentences_with_finding: 9,
            sentences_skipped: 0,
        });
        let s = coverage_stats(&cat.counts());
        assert_eq!(s.finding_fraction, Some(0.9));
        assert_eq!(s.by_polarity["yes"], 1);
        assert_eq!(s.by_type["anatomicalfinding"], 2);
    }

    #[test]
    fn jsonl_skips_bad_lines() {
        let text = "{\"report_id\":\"r\",\"text\":\"x\"}\nnot json\n\n";
        let (reports, diags) = read_reports(text.as_bytes()).unwrap();
        assert_eq!(reports.len(), 1);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].starts_with("line 2"));
    }
}
