//! Multi-command front end: every pipeline stage as its own subcommand,
//! plus a `pipeline` driver that runs them end-to-end.
//!
//! Exit codes: 0 success, 1 usage error, 2 partial (some records failed),
//! 3 fatal. With `--json-errors` failures are mirrored as one JSON object
//! on stderr.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analytics::{
    length_stats, sentiment_mean, sentiment_mean_of_kind, verb_profile_of_kind, LengthStats,
    ValenceLexicon, VerbProfile, VerbTagger,
};
use crate::chronology::{date_corpus, EstimatorKind, EstimatorRegistry, TimeTable};
use crate::corpus::{
    ingest, process_product_name, Corpus, CorpusError, CorpusFormat, HeadlineKind,
    StopwordProvenance, StopwordSet,
};
use crate::credibility::{CredibilityLedger, EventCause, LedgerLock, Score};
use crate::entity::{
    expand_templates, kappa, learn_patterns, load_spans, percentile_threshold, write_spans,
    AnnotationRecord, Gazetteer, PatternSet, Recognizer, SpanOrigin, Template,
};
use crate::matching::{assign_truth, bin, load_bins, write_bins_json, write_truth_csv, TruthDecision};
use crate::similarity::{jaccard, Metric, VectorTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;
pub const EXIT_FATAL: i32 = 3;

const DEFAULT_THRESHOLD: f64 = 0.5;
const DEFAULT_TIMEOUT_SECS: f64 = 10.0;

#[derive(Debug)]
struct CliError {
    code: i32,
    stage: &'static str,
    message: String,
}

impl CliError {
    fn usage(stage: &'static str, message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            stage,
            message: message.into(),
        }
    }

    fn fatal(stage: &'static str, message: impl Into<String>) -> Self {
        Self {
            code: EXIT_FATAL,
            stage,
            message: message.into(),
        }
    }
}

fn fatal_in<E: std::fmt::Display>(stage: &'static str) -> impl Fn(E) -> CliError {
    move |e| CliError::fatal(stage, e.to_string())
}

fn emit_error(err: &CliError, json: bool) {
    if json {
        let body = serde_json::json!({
            "error": { "code": err.code, "stage": err.stage, "message": err.message }
        });
        eprintln!("{body}");
    } else {
        eprintln!("error[{}]: {}", err.stage, err.message);
    }
}

#[derive(Parser)]
#[command(
    name = "leakcred",
    version,
    about = "Score tech-blog credibility from product-leak headlines"
)]
struct Cli {
    /// TOML file supplying defaults for any omitted flag; flags win.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Mirror failures as a JSON object on stderr.
    #[arg(long, global = true)]
    json_errors: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read headline files into one validated corpus artifact.
    Ingest(IngestArgs),
    /// Learn context patterns from templates and a gazetteer.
    Train(TrainArgs),
    /// Recognize product names in every corpus headline.
    Extract(ExtractArgs),
    /// Group recognized headlines into per-product bins.
    Bin(BinArgs),
    /// Estimate creation times for headline URLs.
    Date(DateArgs),
    /// Judge leak claims against press-release times and update ledgers.
    Score(ScoreArgs),
    /// Emit corpus analytics (lengths, sentiment, verb profile) as JSON.
    Report(ReportArgs),
    /// Compute inter-annotator agreement for two annotation files.
    Agree(AgreeArgs),
    /// Run every stage in order into an output directory.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Jaccard,
    Cosine,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Jaccard => Metric::Jaccard,
            MetricArg::Cosine => Metric::Cosine,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Leak,
    #[value(alias = "press_release")]
    PressRelease,
}

impl From<KindArg> for HeadlineKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Leak => HeadlineKind::Leak,
            KindArg::PressRelease => HeadlineKind::PressRelease,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Jsonl,
    Tsv,
}

impl From<FormatArg> for CorpusFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Jsonl => CorpusFormat::Jsonl,
            FormatArg::Tsv => CorpusFormat::Tsv,
        }
    }
}

/// Optional config file; every key mirrors a flag of the same name.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    leaks: Option<Vec<PathBuf>>,
    prs: Option<Vec<PathBuf>>,
    gazetteer: Option<PathBuf>,
    templates: Option<PathBuf>,
    stopwords: Option<PathBuf>,
    vectors: Option<PathBuf>,
    fixtures: Option<PathBuf>,
    backlinks: Option<PathBuf>,
    archive_url: Option<String>,
    http_head: Option<bool>,
    ledger_dir: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    out_dir: Option<PathBuf>,
    metric: Option<String>,
    threshold: Option<f64>,
    percentile: Option<f64>,
    defer_undefined: Option<bool>,
    timeout: Option<f64>,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage("config", format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::usage("config", format!("bad config {}: {e}", path.display())))
}

fn config_metric(cfg: &FileConfig) -> Result<Option<Metric>, CliError> {
    cfg.metric
        .as_deref()
        .map(|m| {
            m.parse()
                .map_err(|_| CliError::usage("config", format!("unknown metric {m:?}")))
        })
        .transpose()
}

fn check_threshold(stage: &'static str, t: f64) -> Result<f64, CliError> {
    if t > 0.0 && t <= 1.0 {
        Ok(t)
    } else {
        Err(CliError::usage(
            stage,
            format!("threshold {t} outside (0, 1]"),
        ))
    }
}

fn check_percentile(stage: &'static str, p: f64) -> Result<f64, CliError> {
    if p > 0.0 && p < 100.0 {
        Ok(p)
    } else {
        Err(CliError::usage(
            stage,
            format!("percentile {p} outside (0, 100)"),
        ))
    }
}

fn resolve_timeout(stage: &'static str, flag: Option<f64>, cfg: &FileConfig) -> Result<Duration, CliError> {
    let secs = flag.or(cfg.timeout).unwrap_or(DEFAULT_TIMEOUT_SECS);
    if secs > 0.0 && secs.is_finite() {
        Ok(Duration::from_secs_f64(secs))
    } else {
        Err(CliError::usage(stage, format!("timeout {secs} not positive")))
    }
}

fn create_parent(stage: &'static str, path: &Path) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(fatal_in(stage))?;
        }
    }
    Ok(())
}

/// Read a corpus artifact; any malformed line means the artifact is broken.
fn load_corpus(stage: &'static str, path: &Path) -> Result<Corpus, CliError> {
    let outcome = ingest(path, CorpusFormat::Jsonl, None).map_err(fatal_in(stage))?;
    if let Some(reject) = outcome.rejects.first() {
        return Err(CliError::fatal(
            stage,
            format!(
                "corpus {} line {}: {}",
                path.display(),
                reject.line,
                reject.reason
            ),
        ));
    }
    Ok(outcome.corpus)
}

fn write_corpus(stage: &'static str, corpus: &Corpus, path: &Path) -> Result<(), CliError> {
    create_parent(stage, path)?;
    corpus.write_jsonl_file(path).map_err(fatal_in(stage))
}

fn load_custom_stopwords(
    stage: &'static str,
    flag: Option<&Path>,
    cfg: &FileConfig,
) -> Result<StopwordSet, CliError> {
    match flag.or(cfg.stopwords.as_deref()) {
        Some(path) => StopwordSet::load(path, StopwordProvenance::CustomDomain)
            .map_err(fatal_in(stage)),
        None => Ok(StopwordSet::builtin_custom()),
    }
}

fn load_vectors(
    stage: &'static str,
    flag: Option<&Path>,
    cfg: &FileConfig,
) -> Result<Option<VectorTable>, CliError> {
    flag.or(cfg.vectors.as_deref())
        .map(|p| VectorTable::load(p).map_err(fatal_in(stage)))
        .transpose()
}

// ---------------------------------------------------------------- ingest

#[derive(Args)]
struct IngestArgs {
    /// Headline files to read.
    #[arg(required = true, value_name = "FILE")]
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Jsonl)]
    format: FormatArg,
    /// Expected kind; required for TSV, enforced per line for JSONL.
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Output corpus file (JSONL).
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

fn run_ingest(args: &IngestArgs, _cfg: &FileConfig) -> Result<i32, CliError> {
    let mut corpus = Corpus::new();
    let mut duplicates = 0usize;
    let mut rejects = 0usize;
    for input in &args.inputs {
        let outcome = ingest(input, args.format.into(), args.kind.map(Into::into)).map_err(
            |e| match e {
                CorpusError::TsvNeedsKind => {
                    CliError::usage("ingest", "--kind is required for TSV input")
                }
                other => CliError::fatal("ingest", format!("{}: {other}", input.display())),
            },
        )?;
        for r in &outcome.rejects {
            eprintln!("ingest: {}:{}: {}", input.display(), r.line, r.reason);
        }
        rejects += outcome.rejects.len();
        duplicates += outcome.duplicate_count;
        duplicates += corpus.merge(outcome.corpus).map_err(fatal_in("ingest"))?;
    }
    write_corpus("ingest", &corpus, &args.out)?;
    eprintln!(
        "ingest: {} headlines, {} duplicates dropped, {} lines rejected -> {}",
        corpus.len(),
        duplicates,
        rejects,
        args.out.display()
    );
    Ok(if rejects > 0 { EXIT_PARTIAL } else { EXIT_OK })
}

// ----------------------------------------------------------------- train

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_name = "PATH")]
    templates: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    gazetteer: Option<PathBuf>,
    /// Output pattern-set file (JSON).
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

fn run_train(args: &TrainArgs, cfg: &FileConfig) -> Result<i32, CliError> {
    let templates_path = args
        .templates
        .as_deref()
        .or(cfg.templates.as_deref())
        .ok_or_else(|| CliError::usage("train", "--templates is required"))?;
    let gazetteer_path = args
        .gazetteer
        .as_deref()
        .or(cfg.gazetteer.as_deref())
        .ok_or_else(|| CliError::usage("train", "--gazetteer is required"))?;
    let templates = Template::load(templates_path).map_err(fatal_in("train"))?;
    let gazetteer = Gazetteer::load(gazetteer_path).map_err(fatal_in("train"))?;
    let examples = expand_templates(&templates, &gazetteer).map_err(fatal_in("train"))?;
    let patterns = learn_patterns(&examples);
    create_parent("train", &args.out)?;
    let file = fs::File::create(&args.out).map_err(fatal_in("train"))?;
    patterns
        .write_json(std::io::BufWriter::new(file))
        .map_err(fatal_in("train"))?;
    eprintln!(
        "train: {} templates x {} names -> {} examples, {} patterns -> {}",
        templates.len(),
        gazetteer.len(),
        examples.len(),
        patterns.len(),
        args.out.display()
    );
    Ok(EXIT_OK)
}

// --------------------------------------------------------------- extract

#[derive(Args)]
struct ExtractArgs {
    #[arg(long, value_name = "PATH")]
    corpus: PathBuf,
    #[arg(long, value_name = "PATH")]
    gazetteer: Option<PathBuf>,
    /// Pattern-set file from `train`; omit for gazetteer-only matching.
    #[arg(long, value_name = "PATH")]
    patterns: Option<PathBuf>,
    /// Custom stopword list (defaults to the builtin domain list).
    #[arg(long, value_name = "PATH")]
    stopwords: Option<PathBuf>,
    /// Output spans file (JSONL).
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

fn run_extract(args: &ExtractArgs, cfg: &FileConfig) -> Result<i32, CliError> {
    let corpus = load_corpus("extract", &args.corpus)?;
    let gazetteer_path = args
        .gazetteer
        .as_deref()
        .or(cfg.gazetteer.as_deref())
        .ok_or_else(|| CliError::usage("extract", "--gazetteer is required"))?;
    let gazetteer = Gazetteer::load(gazetteer_path).map_err(fatal_in("extract"))?;
    let patterns = match &args.patterns {
        Some(path) => PatternSet::load(path).map_err(fatal_in("extract"))?,
        None => PatternSet::default(),
    };
    let stopwords = load_custom_stopwords("extract", args.stopwords.as_deref(), cfg)?;
    let recognizer = Recognizer::new(&gazetteer, &patterns, stopwords);

    let mut spans = Vec::new();
    let mut empty_headlines = 0usize;
    for headline in corpus.headlines() {
        let found = recognizer.recognize(headline);
        if found.is_empty() {
            empty_headlines += 1;
        }
        spans.extend(found);
    }
    let from_gazetteer = spans
        .iter()
        .filter(|s| s.origin == SpanOrigin::Gazetteer)
        .count();
    create_parent("extract", &args.out)?;
    let file = fs::File::create(&args.out).map_err(fatal_in("extract"))?;
    write_spans(&spans, std::io::BufWriter::new(file)).map_err(fatal_in("extract"))?;
    eprintln!(
        "extract: {} spans over {} headlines ({} gazetteer, {} pattern); {} headlines without spans -> {}",
        spans.len(),
        corpus.len(),
        from_gazetteer,
        spans.len() - from_gazetteer,
        empty_headlines,
        args.out.display()
    );
    Ok(EXIT_OK)
}

// ------------------------------------------------------------------- bin

#[derive(Args)]
struct BinArgs {
    #[arg(long, value_name = "PATH")]
    corpus: PathBuf,
    #[arg(long, value_name = "PATH")]
    spans: PathBuf,
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    /// Similarity threshold in (0, 1]; wins over --percentile.
    #[arg(long)]
    threshold: Option<f64>,
    /// Derive the threshold as this nearest-rank percentile of the
    /// observed pairwise surface similarities.
    #[arg(long)]
    percentile: Option<f64>,
    /// Word-vector table (required for the cosine metric).
    #[arg(long, value_name = "PATH")]
    vectors: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    stopwords: Option<PathBuf>,
    /// Output bins file (JSON).
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

/// Pick the working threshold: explicit value, else the requested
/// percentile of the observed score distribution, else 0.5.
fn resolve_threshold(
    stage: &'static str,
    threshold: Option<f64>,
    percentile: Option<f64>,
    cfg: &FileConfig,
    scores: impl FnOnce() -> Vec<f64>,
) -> Result<f64, CliError> {
    if let Some(t) = threshold.or(cfg.threshold) {
        return check_threshold(stage, t);
    }
    if let Some(p) = percentile.or(cfg.percentile) {
        let p = check_percentile(stage, p)?;
        let observed = scores();
        if observed.is_empty() {
            return Ok(DEFAULT_THRESHOLD);
        }
        let derived = percentile_threshold(&observed, p).map_err(fatal_in(stage))?;
        // The threshold domain is (0, 1]; an all-disjoint distribution can
        // put the percentile at 0, which would merge everything.
        return Ok(derived.max(f64::MIN_POSITIVE));
    }
    Ok(DEFAULT_THRESHOLD)
}

fn run_bin(args: &BinArgs, cfg: &FileConfig) -> Result<i32, CliError> {
    let corpus = load_corpus("bin", &args.corpus)?;
    let spans = load_spans(&args.spans).map_err(fatal_in("bin"))?;
    let metric: Metric = match args.metric.map(Into::into).or(config_metric(cfg)?) {
        Some(m) => m,
        None => Metric::Jaccard,
    };
    let vectors = load_vectors("bin", args.vectors.as_deref(), cfg)?;
    if metric == Metric::Cosine && vectors.is_none() {
        return Err(CliError::usage("bin", "cosine metric requires --vectors"));
    }
    let stopwords = load_custom_stopwords("bin", args.stopwords.as_deref(), cfg)?;

    let threshold = resolve_threshold("bin", args.threshold, args.percentile, cfg, || {
        let surfaces: BTreeSet<String> = spans
            .iter()
            .map(|s| process_product_name(&s.surface, &stopwords))
            .filter(|s| !s.is_empty())
            .collect();
        let surfaces: Vec<String> = surfaces.into_iter().collect();
        let mut scores = Vec::new();
        for i in 0..surfaces.len() {
            for j in i + 1..surfaces.len() {
                scores.push(match metric {
                    Metric::Jaccard => jaccard(&surfaces[i], &surfaces[j]),
                    Metric::Cosine => vectors
                        .as_ref()
                        .expect("checked above")
                        .cosine(&surfaces[i], &surfaces[j]),
                });
            }
        }
        scores
    })?;

    let outcome = bin(&corpus, &spans, metric, vectors.as_ref(), threshold, &stopwords)
        .map_err(fatal_in("bin"))?;
    create_parent("bin", &args.out)?;
    let file = fs::File::create(&args.out).map_err(fatal_in("bin"))?;
    write_bins_json(&outcome.bins, std::io::BufWriter::new(file)).map_err(fatal_in("bin"))?;
    eprintln!(
        "bin: {} bins, {} headlines unbinned (metric {}, threshold {}) -> {}",
        outcome.bins.len(),
        outcome.unbinned.len(),
        metric,
        threshold,
        args.out.display()
    );
    Ok(EXIT_OK)
}

// ------------------------------------------------------------------ date

#[derive(Args)]
struct DateArgs {
    #[arg(long, value_name = "PATH")]
    corpus: PathBuf,
    /// Known-time fixture table (TSV url, RFC3339 time, source tag).
    #[arg(long, value_name = "PATH")]
    fixtures: Option<PathBuf>,
    /// Backlink discovery table, same TSV shape as --fixtures.
    #[arg(long, value_name = "PATH")]
    backlinks: Option<PathBuf>,
    /// Archive lookup endpoint; `{url}` is replaced per request.
    #[arg(long, value_name = "TEMPLATE")]
    archive_url: Option<String>,
    /// Also issue HTTP HEAD requests and honor Last-Modified.
    #[arg(long)]
    http_head: bool,
    /// Per-request timeout in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Output dated corpus (JSONL).
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

fn build_registry(
    stage: &'static str,
    fixtures: Option<&Path>,
    backlinks: Option<&Path>,
    archive_url: Option<&str>,
    http_head: bool,
) -> Result<EstimatorRegistry, CliError> {
    let mut registry = EstimatorRegistry::new();
    if let Some(path) = fixtures {
        let table = TimeTable::load(path).map_err(fatal_in(stage))?;
        registry
            .push("fixtures", EstimatorKind::FixtureFile(table))
            .map_err(fatal_in(stage))?;
    }
    if let Some(template) = archive_url {
        registry
            .push(
                "archive",
                EstimatorKind::ArchiveLookup {
                    query_template: template.to_string(),
                },
            )
            .map_err(|e| CliError::usage(stage, e.to_string()))?;
    }
    if http_head {
        registry
            .push("http-head", EstimatorKind::HttpHeader)
            .map_err(fatal_in(stage))?;
    }
    if let Some(path) = backlinks {
        let table = TimeTable::load(path).map_err(fatal_in(stage))?;
        registry
            .push("backlinks", EstimatorKind::BacklinkStub(table))
            .map_err(fatal_in(stage))?;
    }
    Ok(registry)
}

fn untimed_count(corpus: &Corpus) -> usize {
    corpus
        .headlines()
        .iter()
        .filter(|h| h.effective_time().is_none())
        .count()
}

fn run_date(args: &DateArgs, cfg: &FileConfig) -> Result<i32, CliError> {
    let corpus = load_corpus("date", &args.corpus)?;
    let registry = build_registry(
        "date",
        args.fixtures.as_deref().or(cfg.fixtures.as_deref()),
        args.backlinks.as_deref().or(cfg.backlinks.as_deref()),
        args.archive_url.as_deref().or(cfg.archive_url.as_deref()),
        args.http_head || cfg.http_head.unwrap_or(false),
    )?;
    if registry.is_empty() {
        return Err(CliError::usage(
            "date",
            "no estimator sources; pass --fixtures, --archive-url, --backlinks, or --http-head",
        ));
    }
    let timeout = resolve_timeout("date", args.timeout, cfg)?;
    let outcome = date_corpus(&corpus, &registry, timeout);
    let untimed = untimed_count(&outcome.corpus);
    write_corpus("date", &outcome.corpus, &args.out)?;
    eprintln!(
        "date: {} of {} urls estimated, {} estimator failures, {} headlines without any time -> {}",
        outcome.corpus.len() - outcome.undatable.len(),
        outcome.corpus.len(),
        outcome.failure_count,
        untimed,
        args.out.display()
    );
    Ok(if untimed > 0 { EXIT_PARTIAL } else { EXIT_OK })
}

// ----------------------------------------------------------------- score

#[derive(Args)]
struct ScoreArgs {
    /// Directory holding one ledger file per blog.
    #[arg(long, value_name = "DIR")]
    ledger_dir: Option<PathBuf>,
    /// Dated corpus; together with --bins switches to update mode.
    #[arg(long, value_name = "PATH")]
    corpus: Option<PathBuf>,
    /// Bins file from `bin`.
    #[arg(long, value_name = "PATH")]
    bins: Option<PathBuf>,
    /// Blog to score (repeatable; default: every leak source or ledger).
    #[arg(long = "blog", value_name = "SOURCE")]
    blogs: Vec<String>,
    /// Leave leak-only products undecided instead of counting them false.
    #[arg(long)]
    defer_undefined: bool,
    /// Also export the truth assignments as CSV.
    #[arg(long, value_name = "PATH")]
    truth_out: Option<PathBuf>,
}

fn ledger_file(dir: &Path, blog: &str) -> PathBuf {
    let safe: String = blog
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    let safe = if safe.is_empty() { "_".to_string() } else { safe };
    dir.join(format!("{safe}.json"))
}

fn score_line(blog: &str, score: Score) -> String {
    let mut line = format!("{}\t{}\t{}\t{}", blog, score.n, score.sum, score.value());
    if score.is_unscored() {
        line.push_str("\tunscored");
    }
    line
}

fn cause_name(cause: EventCause) -> &'static str {
    match cause {
        EventCause::NewTrue => "new_true",
        EventCause::NewFalse => "new_false",
        EventCause::Revision => "revision",
    }
}

fn run_score(args: &ScoreArgs, cfg: &FileConfig) -> Result<i32, CliError> {
    let ledger_dir = args
        .ledger_dir
        .as_deref()
        .or(cfg.ledger_dir.as_deref())
        .ok_or_else(|| CliError::usage("score", "--ledger-dir is required"))?;

    let update_mode = args.corpus.is_some() || args.bins.is_some();
    if update_mode && (args.corpus.is_none() || args.bins.is_none()) {
        return Err(CliError::usage(
            "score",
            "update mode needs both --corpus and --bins",
        ));
    }

    if !update_mode {
        // Read-only: print current scores without touching any ledger.
        let mut blogs = args.blogs.clone();
        if blogs.is_empty() {
            if ledger_dir.is_dir() {
                for entry in fs::read_dir(ledger_dir).map_err(fatal_in("score"))? {
                    let path = entry.map_err(fatal_in("score"))?.path();
                    if path.extension().is_some_and(|e| e == "json") {
                        let ledger = CredibilityLedger::load(&path).map_err(fatal_in("score"))?;
                        blogs.push(ledger.blog().to_string());
                    }
                }
            }
            blogs.sort();
            if blogs.is_empty() {
                println!("{}", score_line("-", Score { sum: 0, n: 0 }));
                return Ok(EXIT_OK);
            }
        } else {
            blogs.sort();
            blogs.dedup();
        }
        for blog in &blogs {
            let path = ledger_file(ledger_dir, blog);
            let score = if path.exists() {
                CredibilityLedger::load(&path)
                    .map_err(fatal_in("score"))?
                    .score()
            } else {
                Score { sum: 0, n: 0 }
            };
            println!("{}", score_line(blog, score));
        }
        return Ok(EXIT_OK);
    }

    let corpus = load_corpus("score", args.corpus.as_deref().expect("checked"))?;
    let bins = load_bins(args.bins.as_deref().expect("checked"), &corpus)
        .map_err(fatal_in("score"))?;
    let defer = args.defer_undefined || cfg.defer_undefined.unwrap_or(false);
    let mut blogs = if args.blogs.is_empty() {
        corpus.sources_of_kind(HeadlineKind::Leak)
    } else {
        args.blogs.clone()
    };
    blogs.sort();
    blogs.dedup();

    fs::create_dir_all(ledger_dir).map_err(fatal_in("score"))?;
    let mut assignments = Vec::new();
    let mut undatable = 0usize;
    for blog in &blogs {
        let path = ledger_file(ledger_dir, blog);
        let lock = LedgerLock::acquire(&path).map_err(fatal_in("score"))?;
        let mut ledger = if path.exists() {
            CredibilityLedger::load(&path).map_err(fatal_in("score"))?
        } else {
            CredibilityLedger::new(blog)
        };
        if ledger.blog() != blog {
            return Err(CliError::fatal(
                "score",
                format!(
                    "{} belongs to blog {:?}, expected {:?}",
                    path.display(),
                    ledger.blog(),
                    blog
                ),
            ));
        }
        for bin in &bins {
            match assign_truth(bin, blog, defer) {
                TruthDecision::Assigned(a) => {
                    if let Some(event) = ledger.update(&a).map_err(fatal_in("score"))? {
                        eprintln!(
                            "score: {} {} {} {} -> {}",
                            event.blog,
                            event.product_key,
                            cause_name(event.cause),
                            event.prior_score,
                            event.new_score
                        );
                    }
                    assignments.push(a);
                }
                TruthDecision::UndatableLeaks => {
                    undatable += 1;
                    eprintln!(
                        "score: warning: no usable leak time for {} in bin {}",
                        blog, bin.product_key
                    );
                }
                TruthDecision::Deferred | TruthDecision::NotApplicable => {}
            }
        }
        ledger.persist_with(&path, &lock).map_err(fatal_in("score"))?;
        println!("{}", score_line(blog, ledger.score()));
    }

    if let Some(truth_path) = &args.truth_out {
        create_parent("score", truth_path)?;
        let file = fs::File::create(truth_path).map_err(fatal_in("score"))?;
        write_truth_csv(&assignments, std::io::BufWriter::new(file))
            .map_err(fatal_in("score"))?;
        eprintln!("score: {} assignments -> {}", assignments.len(), truth_path.display());
    }
    Ok(if undatable > 0 { EXIT_PARTIAL } else { EXIT_OK })
}

// ---------------------------------------------------------------- report

#[derive(Args)]
struct ReportArgs {
    #[arg(long, value_name = "PATH")]
    corpus: PathBuf,
    /// Valence lexicon TSV (defaults to the builtin lexicon).
    #[arg(long, value_name = "PATH")]
    lexicon: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct SentimentSection {
    lexicon_id: String,
    per_source_mean: BTreeMap<String, f64>,
    per_kind_mean: BTreeMap<&'static str, f64>,
}

#[derive(Serialize)]
struct AnalyticsReport {
    headline_count: usize,
    length_stats: BTreeMap<&'static str, LengthStats>,
    sentiment: SentimentSection,
    verb_profile: BTreeMap<&'static str, VerbProfile>,
}

const KIND_KEYS: [(HeadlineKind, &str); 2] = [
    (HeadlineKind::Leak, "leak"),
    (HeadlineKind::PressRelease, "press_release"),
];

fn run_report(args: &ReportArgs, cfg: &FileConfig) -> Result<i32, CliError> {
    let corpus = load_corpus("report", &args.corpus)?;
    let lexicon = match args.lexicon.as_deref().or(cfg.lexicon.as_deref()) {
        Some(path) => ValenceLexicon::load(path).map_err(fatal_in("report"))?,
        None => ValenceLexicon::builtin(),
    };
    let tagger = VerbTagger::default();

    let mut lengths = BTreeMap::new();
    let mut verbs = BTreeMap::new();
    let mut per_kind_mean = BTreeMap::new();
    for (kind, key) in KIND_KEYS {
        if let Ok(stats) = length_stats(&corpus, kind) {
            lengths.insert(key, stats);
        }
        if let Some(mean) = sentiment_mean_of_kind(&corpus, &lexicon, kind) {
            per_kind_mean.insert(key, mean);
        }
        let profile = verb_profile_of_kind(&corpus, &tagger, kind);
        if profile.total() > 0 || corpus.of_kind(kind).next().is_some() {
            verbs.insert(key, profile);
        }
    }
    let sources = sentiment_mean(&corpus, &lexicon);
    let report = AnalyticsReport {
        headline_count: corpus.len(),
        length_stats: lengths,
        sentiment: SentimentSection {
            lexicon_id: sources.lexicon_id,
            per_source_mean: sources.per_source_mean,
            per_kind_mean,
        },
        verb_profile: verbs,
    };
    let mut json = serde_json::to_string_pretty(&report).map_err(fatal_in("report"))?;
    json.push('\n');
    match &args.out {
        Some(path) => {
            create_parent("report", path)?;
            fs::write(path, &json).map_err(fatal_in("report"))?;
            eprintln!("report: {} headlines -> {}", corpus.len(), path.display());
        }
        None => print!("{json}"),
    }
    Ok(EXIT_OK)
}

// ----------------------------------------------------------------- agree

#[derive(Args)]
struct AgreeArgs {
    /// Exactly two annotation CSV files.
    #[arg(required = true, num_args = 2, value_name = "CSV")]
    annotations: Vec<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn run_agree(args: &AgreeArgs, _cfg: &FileConfig) -> Result<i32, CliError> {
    let a1 = AnnotationRecord::load(&args.annotations[0]).map_err(fatal_in("agree"))?;
    let a2 = AnnotationRecord::load(&args.annotations[1]).map_err(fatal_in("agree"))?;
    let report = kappa(&a1, &a2).map_err(fatal_in("agree"))?;
    let mut json = serde_json::to_string_pretty(&report).map_err(fatal_in("agree"))?;
    json.push('\n');
    match &args.out {
        Some(path) => {
            create_parent("agree", path)?;
            fs::write(path, &json).map_err(fatal_in("agree"))?;
            eprintln!("agree: kappa {} over {} headlines -> {}", report.kappa, report.n, path.display());
        }
        None => print!("{json}"),
    }
    Ok(EXIT_OK)
}

// -------------------------------------------------------------- pipeline

#[derive(Args)]
struct PipelineArgs {
    /// Leak headline files.
    #[arg(long = "leaks", value_name = "FILE")]
    leaks: Vec<PathBuf>,
    /// Press-release headline files.
    #[arg(long = "prs", value_name = "FILE")]
    prs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Jsonl)]
    format: FormatArg,
    #[arg(long, value_name = "PATH")]
    gazetteer: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    templates: Option<PathBuf>,
    /// Directory receiving every stage artifact.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    fixtures: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    backlinks: Option<PathBuf>,
    #[arg(long, value_name = "TEMPLATE")]
    archive_url: Option<String>,
    #[arg(long)]
    http_head: bool,
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    percentile: Option<f64>,
    #[arg(long, value_name = "PATH")]
    vectors: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    stopwords: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    defer_undefined: bool,
    #[arg(long = "blog", value_name = "SOURCE")]
    blogs: Vec<String>,
}

fn run_pipeline(args: &PipelineArgs, cfg: &FileConfig) -> Result<i32, CliError> {
    let out_dir = args
        .out_dir
        .clone()
        .or(cfg.out_dir.clone())
        .ok_or_else(|| CliError::usage("pipeline", "--out-dir is required"))?;
    let leaks = if args.leaks.is_empty() {
        cfg.leaks.clone().unwrap_or_default()
    } else {
        args.leaks.clone()
    };
    let prs = if args.prs.is_empty() {
        cfg.prs.clone().unwrap_or_default()
    } else {
        args.prs.clone()
    };
    if leaks.is_empty() {
        return Err(CliError::usage("pipeline", "--leaks is required"));
    }
    fs::create_dir_all(&out_dir).map_err(fatal_in("pipeline"))?;

    let corpus_path = out_dir.join("corpus.jsonl");
    let patterns_path = out_dir.join("patterns.json");
    let spans_path = out_dir.join("spans.jsonl");
    let bins_path = out_dir.join("bins.json");
    let dated_path = out_dir.join("dated.jsonl");
    let truth_path = out_dir.join("truth.csv");
    let report_path = out_dir.join("report.json");
    let ledger_dir = out_dir.join("ledgers");
    let mut worst = EXIT_OK;

    // Stage 1: ingest, enforcing the kind each file was declared under.
    let mut corpus = Corpus::new();
    let mut duplicates = 0usize;
    let mut rejects = 0usize;
    for (files, kind) in [(&leaks, HeadlineKind::Leak), (&prs, HeadlineKind::PressRelease)] {
        for input in files {
            let outcome = ingest(input, args.format.into(), Some(kind))
                .map_err(|e| CliError::fatal("pipeline", format!("{}: {e}", input.display())))?;
            for r in &outcome.rejects {
                eprintln!("pipeline: {}:{}: {}", input.display(), r.line, r.reason);
            }
            rejects += outcome.rejects.len();
            duplicates += outcome.duplicate_count;
            duplicates += corpus.merge(outcome.corpus).map_err(fatal_in("pipeline"))?;
        }
    }
    write_corpus("pipeline", &corpus, &corpus_path)?;
    eprintln!(
        "pipeline: ingested {} headlines ({} duplicates, {} rejects) -> {}",
        corpus.len(),
        duplicates,
        rejects,
        corpus_path.display()
    );
    if rejects > 0 {
        worst = worst.max(EXIT_PARTIAL);
    }

    // Stage 2: train + extract.
    worst = worst.max(run_train(
        &TrainArgs {
            templates: args.templates.clone(),
            gazetteer: args.gazetteer.clone(),
            out: patterns_path.clone(),
        },
        cfg,
    )?);
    worst = worst.max(run_extract(
        &ExtractArgs {
            corpus: corpus_path.clone(),
            gazetteer: args.gazetteer.clone(),
            patterns: Some(patterns_path.clone()),
            stopwords: args.stopwords.clone(),
            out: spans_path.clone(),
        },
        cfg,
    )?);

    // Stage 3: bin.
    worst = worst.max(run_bin(
        &BinArgs {
            corpus: corpus_path.clone(),
            spans: spans_path.clone(),
            metric: args.metric,
            threshold: args.threshold,
            percentile: args.percentile,
            vectors: args.vectors.clone(),
            stopwords: args.stopwords.clone(),
            out: bins_path.clone(),
        },
        cfg,
    )?);

    // Stage 4: date; without estimator sources times pass through as-is.
    let have_estimators = args.fixtures.is_some()
        || cfg.fixtures.is_some()
        || args.backlinks.is_some()
        || cfg.backlinks.is_some()
        || args.archive_url.is_some()
        || cfg.archive_url.is_some()
        || args.http_head
        || cfg.http_head.unwrap_or(false);
    if have_estimators {
        worst = worst.max(run_date(
            &DateArgs {
                corpus: corpus_path.clone(),
                fixtures: args.fixtures.clone(),
                backlinks: args.backlinks.clone(),
                archive_url: args.archive_url.clone(),
                http_head: args.http_head,
                timeout: args.timeout,
                out: dated_path.clone(),
            },
            cfg,
        )?);
    } else {
        write_corpus("pipeline", &corpus, &dated_path)?;
        let untimed = untimed_count(&corpus);
        eprintln!(
            "pipeline: no estimator sources; declared times kept, {untimed} headlines without any time -> {}",
            dated_path.display()
        );
        if untimed > 0 {
            worst = worst.max(EXIT_PARTIAL);
        }
    }

    // Stage 5: truth + ledgers.
    worst = worst.max(run_score(
        &ScoreArgs {
            ledger_dir: Some(ledger_dir),
            corpus: Some(dated_path.clone()),
            bins: Some(bins_path),
            blogs: args.blogs.clone(),
            defer_undefined: args.defer_undefined,
            truth_out: Some(truth_path),
        },
        cfg,
    )?);

    // Stage 6: analytics over the dated corpus.
    worst = worst.max(run_report(
        &ReportArgs {
            corpus: dated_path,
            lexicon: args.lexicon.clone(),
            out: Some(report_path),
        },
        cfg,
    )?);

    Ok(worst)
}

// ------------------------------------------------------------------ run

/// Parse arguments, dispatch, and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let json_errors = argv.iter().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return EXIT_OK;
            }
            let err = CliError::usage("usage", e.to_string());
            emit_error(&err, json_errors);
            return EXIT_USAGE;
        }
    };
    let json_errors = cli.json_errors || json_errors;
    let cfg = match load_config(cli.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(err) => {
            emit_error(&err, json_errors);
            return err.code;
        }
    };
    let result = match &cli.command {
        Command::Ingest(args) => run_ingest(args, &cfg),
        Command::Train(args) => run_train(args, &cfg),
        Command::Extract(args) => run_extract(args, &cfg),
        Command::Bin(args) => run_bin(args, &cfg),
        Command::Date(args) => run_date(args, &cfg),
        Command::Score(args) => run_score(args, &cfg),
        Command::Report(args) => run_report(args, &cfg),
        Command::Agree(args) => run_agree(args, &cfg),
        Command::Pipeline(args) => run_pipeline(args, &cfg),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            emit_error(&err, json_errors);
            err.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_declaration_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn metric_and_kind_flags_parse() {
        let cli = Cli::try_parse_from([
            "leakcred", "bin", "--corpus", "c", "--spans", "s", "--out", "b",
            "--metric", "cosine", "--threshold", "0.7",
        ])
        .unwrap();
        match cli.command {
            Command::Bin(args) => {
                assert_eq!(args.metric, Some(MetricArg::Cosine));
                assert_eq!(args.threshold, Some(0.7));
            }
            _ => panic!("expected bin"),
        }
        let cli = Cli::try_parse_from([
            "leakcred", "ingest", "x.tsv", "--format", "tsv", "--kind", "press_release",
            "--out", "c.jsonl",
        ])
        .unwrap();
        match cli.command {
            Command::Ingest(args) => assert_eq!(args.kind, Some(KindArg::PressRelease)),
            _ => panic!("expected ingest"),
        }
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(&path, "treshold = 0.5\n").unwrap();
        let err = load_config(Some(&path)).unwrap_err();
        assert_eq!(err.code, EXIT_USAGE);
    }

    #[test]
    fn threshold_and_percentile_ranges_enforced() {
        assert!(check_threshold("bin", 0.0).is_err());
        assert!(check_threshold("bin", 1.5).is_err());
        assert_eq!(check_threshold("bin", 1.0).unwrap(), 1.0);
        assert!(check_percentile("bin", 0.0).is_err());
        assert!(check_percentile("bin", 100.0).is_err());
        assert_eq!(check_percentile("bin", 25.0).unwrap(), 25.0);
    }

    #[test]
    fn resolve_threshold_precedence() {
        let cfg = FileConfig {
            threshold: Some(0.9),
            ..FileConfig::default()
        };
        // Flag wins over config; config wins over percentile and default.
        let t = resolve_threshold("bin", Some(0.4), None, &cfg, Vec::new).unwrap();
        assert_eq!(t, 0.4);
        let t = resolve_threshold("bin", None, Some(25.0), &cfg, Vec::new).unwrap();
        assert_eq!(t, 0.9);
        let none = FileConfig::default();
        let t = resolve_threshold("bin", None, None, &none, Vec::new).unwrap();
        assert_eq!(t, DEFAULT_THRESHOLD);
        let t = resolve_threshold("bin", None, Some(25.0), &none, || {
            vec![0.2, 0.5, 0.5, 1.0]
        })
        .unwrap();
        assert_eq!(t, 0.2);
        // Empty distribution falls back; an all-zero one clamps above 0.
        let t = resolve_threshold("bin", None, Some(25.0), &none, Vec::new).unwrap();
        assert_eq!(t, DEFAULT_THRESHOLD);
        let t = resolve_threshold("bin", None, Some(50.0), &none, || vec![0.0, 0.0]).unwrap();
        assert!(t > 0.0);
    }

    #[test]
    fn score_line_formats() {
        assert_eq!(score_line("AP", Score { sum: 3, n: 2 }), "AP\t2\t3\t1.5");
        assert_eq!(
            score_line("AP", Score { sum: 0, n: 0 }),
            "AP\t0\t0\t0\tunscored"
        );
    }

    #[test]
    fn ledger_file_sanitizes_source_names() {
        let dir = Path::new("/tmp/ledgers");
        assert_eq!(ledger_file(dir, "AP"), dir.join("AP.json"));
        assert_eq!(ledger_file(dir, "a/b c"), dir.join("a_b_c.json"));
        assert_eq!(ledger_file(dir, ""), dir.join("_.json"));
    }
}
