//! `finelabel` command line.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 fatal data error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use crate::corpus::{
    coverage_stats, filter_support, mine_corpus, read_labels, read_manifest, read_reports, CatalogCounts, LabelCatalog,
    Manifest, Totals,
};
use crate::lexicon::{load_lexicon, LexiconError};
use crate::parsegraph::read_parses;
use crate::pipeline::{Extractor, PipelineConfig, SectionFilter};

#[derive(Debug, Parser)]
#[command(
    name = "finelabel",
    version,
    about = "Fine-grained finding labels from radiology reports"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a lexicon file and report every problem found.
    ValidateLexicon {
        /// Lexicon JSON file.
        path: PathBuf,
    },
    /// Label reports and write one JSON record per label.
    Extract(ExtractArgs),
    /// Build a label catalog from extracted labels and select by image support.
    Mine(MineArgs),
    /// Print coverage statistics of a saved catalog.
    Stats {
        /// Catalog JSON written by `mine --catalog-out`.
        #[arg(long)]
        catalog: PathBuf,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Lexicon JSON file.
    #[arg(long)]
    pub lexicon: PathBuf,
    /// Reports as JSON lines: {"report_id", "text", "image_ids"}.
    #[arg(long)]
    pub reports: PathBuf,
    /// Dependency parses keyed by report_id and sentence_index.
    #[arg(long)]
    pub parses: Option<PathBuf>,
    /// Image manifest CSV (report_id,image_id) for the run statistics.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Run without parses: one group per sentence, window negation.
    #[arg(long)]
    pub flat: bool,
    /// Use negation vocabularies only, ignoring the parse for scope.
    #[arg(long)]
    pub no_parse_negation: bool,
    /// Minimum prefix ratio for a word pair to align.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Minimum fraction of phrase words that must align.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Penalty per skipped token inside an alignment.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Token window for vocabulary negation without a parse.
    #[arg(long)]
    pub window: Option<usize>,
    /// Read every section, not only findings and impression.
    #[arg(long)]
    pub all_sections: bool,
    /// Worker threads, 0 for one per core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Pipeline configuration JSON; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Label output (JSON lines), stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run statistics as JSON.
    #[arg(long)]
    pub stats_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    /// Labels written by `extract`.
    #[arg(long)]
    pub labels: PathBuf,
    /// Image manifest CSV (report_id,image_id). Without it each report counts
    /// as one image.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Minimum number of distinct images for a label to be selected.
    #[arg(long, default_value_t = 100)]
    pub min_support: usize,
    /// Run statistics from `extract --stats-out`, to carry sentence totals.
    #[arg(long)]
    pub run_stats: Option<PathBuf>,
    /// Catalog JSON output.
    #[arg(long)]
    pub catalog_out: Option<PathBuf>,
    /// Selected labels as JSON lines, stdout when absent.
    #[arg(long)]
    pub selected_out: Option<PathBuf>,
    /// Coverage statistics JSON output.
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    error: anyhow::Error,
}

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: e.into(),
    }
}

fn data_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: e.into(),
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::ValidateLexicon { path } => validate_lexicon(&path),
        Command::Extract(a) => extract(&a),
        Command::Mine(a) => mine(&a),
        Command::Stats { catalog, json } => stats(&catalog, json),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            f.code
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("cannot open {}", path.display()))
        .map_err(config_err)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot create {}", path.display()))
        .map_err(config_err)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_err(e: io::Error) -> Failure {
    data_err(anyhow!(e).context("write failed"))
}

fn validate_lexicon(path: &Path) -> CmdResult {
    match load_lexicon(path) {
        Ok(lex) => {
            println!(
                "ok: {} core findings, {} modifiers",
                lex.core_findings.len(),
                lex.modifiers.len()
            );
            Ok(())
        }
        Err(e @ LexiconError::Io { .. }) => Err(config_err(e)),
        Err(e) => Err(data_err(e)),
    }
}

fn load_manifest(path: Option<&Path>) -> Result<Option<Manifest>, Failure> {
    path.map(|p| {
        read_manifest(open(p)?)
            .with_context(|| format!("malformed manifest {}", p.display()))
            .map_err(data_err)
    })
    .transpose()
}

fn pipeline_config(a: &ExtractArgs) -> Result<PipelineConfig, Failure> {
    let mut cfg = match &a.config {
        Some(p) => serde_json::from_reader(open(p)?)
            .with_context(|| format!("bad config {}", p.display()))
            .map_err(config_err)?,
        None => PipelineConfig::default(),
    };
    if let Some(t) = a.tau {
        cfg.params.tau = t;
    }
    if let Some(g) = a.gamma {
        cfg.params.gamma = g;
    }
    if let Some(d) = a.delta {
        cfg.params.delta = d;
    }
    if let Some(w) = a.window {
        cfg.window = w;
    }
    cfg.flat |= a.flat;
    if a.no_parse_negation {
        cfg.parse_negation = false;
    }
    if a.all_sections {
        cfg.sections = SectionFilter::All;
    }
    cfg.params.validate().map_err(config_err)?;
    Ok(cfg)
}

fn extract(a: &ExtractArgs) -> CmdResult {
    let cfg = pipeline_config(a)?;
    if !cfg.flat && a.parses.is_none() {
        return Err(config_err(anyhow!("--parses is required unless --flat is given")));
    }
    let lexicon = load_lexicon(&a.lexicon).map_err(config_err)?;
    let extractor = Extractor::new(lexicon, cfg.clone()).map_err(config_err)?;

    let (reports, diags) = read_reports(open(&a.reports)?).map_err(data_err)?;
    for d in &diags {
        log::warn!("{}: {d}", a.reports.display());
    }
    let parses = match (&a.parses, cfg.flat) {
        (Some(p), false) => {
            let (store, diags) = read_parses(open(p)?).map_err(data_err)?;
            for d in &diags {
                log::warn!("{}: {d}", p.display());
            }
            Some(store)
        }
        _ => None,
    };
    let manifest = load_manifest(a.manifest.as_deref())?;

    let mined = mine_corpus(&extractor, &reports, parses.as_ref(), manifest.as_ref(), a.jobs);
    for d in &mined.diagnostics {
        log::warn!("{d}");
    }
    let mut out = output(a.out.as_deref())?;
    for l in &mined.labels {
        let line = serde_json::to_string(l).expect("label serializes");
        writeln!(out, "{line}").map_err(write_err)?;
    }
    out.flush().map_err(write_err)?;

    let stats = coverage_stats(&mined.catalog.counts());
    if let Some(p) = &a.stats_out {
        let mut w = create(p)?;
        serde_json::to_writer_pretty(&mut w, &stats).map_err(data_err)?;
        writeln!(w).and_then(|_| w.flush()).map_err(write_err)?;
    }
    eprint!("{stats}");
    Ok(())
}

fn mine(a: &MineArgs) -> CmdResult {
    let (labels, diags) = read_labels(open(&a.labels)?).map_err(data_err)?;
    for d in &diags {
        log::warn!("{}: {d}", a.labels.display());
    }
    let manifest = load_manifest(a.manifest.as_deref())?;
    let mut catalog = LabelCatalog::from_labels(&labels, manifest.as_ref());
    if let Some(p) = &a.run_stats {
        let s: crate::corpus::CoverageStats = serde_json::from_reader(open(p)?)
            .with_context(|| format!("bad run statistics {}", p.display()))
            .map_err(data_err)?;
        catalog.set_totals(Totals {
            reports: s.reports,
            sentences_processed: s.sentences_processed,
            sentences_with_finding: s.sentences_with_finding,
            sentences_skipped: s.sentences_skipped,
        });
    }
    let counts = catalog.counts();
    if let Some(p) = &a.catalog_out {
        let mut w = create(p)?;
        writeln!(w, "{}", counts.to_json())
            .and_then(|_| w.flush())
            .map_err(write_err)?;
    }
    let mut out = output(a.selected_out.as_deref())?;
    for (label, support) in filter_support(&counts, a.min_support) {
        let line = serde_json::json!({ "label": label, "image_support": support });
        writeln!(out, "{line}").map_err(write_err)?;
    }
    out.flush().map_err(write_err)?;
    let stats = coverage_stats(&counts);
    if let Some(p) = &a.stats {
        let mut w = create(p)?;
        serde_json::to_writer_pretty(&mut w, &stats).map_err(data_err)?;
        writeln!(w).and_then(|_| w.flush()).map_err(write_err)?;
    }
    eprint!("{stats}");
    Ok(())
}

fn stats(path: &Path, json: bool) -> CmdResult {
    let counts: CatalogCounts = serde_json::from_reader(open(path)?)
        .with_context(|| format!("malformed catalog {}", path.display()))
        .map_err(data_err)?;
    let s = coverage_stats(&counts);
    if json {
        println!("{}", serde_json::to_string_pretty(&s).expect("stats serialize"));
    } else {
        print!("{s}");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["finelabel", "bogus"]), 1);
        assert_eq!(run(["finelabel", "extract"]), 1);
        assert_eq!(run(["finelabel", "--help"]), 0);
    }

    #[test]
    fn flag_overrides() {
        let cli = Cli::try_parse_from([
            "finelabel",
            "extract",
            "--lexicon",
            "l",
            "--reports",
            "r",
            "--tau",
            "0.8",
            "--flat",
            "--all-sections",
        ])
        .unwrap();
        let Command::Extract(a) = cli.command else { panic!() };
        let cfg = pipeline_config(&a).unwrap();
        assert_eq!(cfg.params.tau, 0.8);
        assert!(cfg.flat);
        assert_eq!(cfg.sections, SectionFilter::All);
    }

    #[test]
    fn bad_threshold_is_config_error() {
        let cli = Cli::try_parse_from([
            "finelabel",
            "extract",
            "--lexicon",
            "l",
            "--reports",
            "r",
            "--gamma",
            "0",
        ])
        .unwrap();
        let Command::Extract(a) = cli.command else { panic!() };
        assert_eq!(pipeline_config(&a).unwrap_err().code, 1);
    }
}
