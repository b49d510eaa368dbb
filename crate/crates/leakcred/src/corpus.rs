//! Headline corpora: ingestion, validation, normalization, and persistence.
//!
//! A [`Corpus`] is an ordered, deduplicated collection of [`Headline`]s from
//! leak blogs and official press-release archives. Text is cleaned at ingest
//! (NFC, whitespace collapse) but keeps its original casing; [`normalize`]
//! produces the fully case-folded form used for matching and keys.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use unicode_normalization::UnicodeNormalization;

/// Whether a headline comes from a leak blog or an official press-release archive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HeadlineKind {
    #[serde(rename = "leak")]
    Leak,
    #[serde(rename = "press_release")]
    PressRelease,
}

impl fmt::Display for HeadlineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeadlineKind::Leak => write!(f, "leak"),
            HeadlineKind::PressRelease => write!(f, "press_release"),
        }
    }
}

impl std::str::FromStr for HeadlineKind {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "leak" => Ok(HeadlineKind::Leak),
            "press_release" => Ok(HeadlineKind::PressRelease),
            other => Err(CorpusError::InvalidKind(other.to_string())),
        }
    }
}

/// One blog or press-release post title.
///
/// `text` is cleaned (NFC, collapsed whitespace) but case-preserving;
/// downstream matching lowercases on demand via [`normalize`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Headline {
    pub id: String,
    pub source: String,
    pub kind: HeadlineKind,
    pub url: String,
    pub text: String,
    pub declared_time: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated_time: Option<DateTime<Utc>>,
}

impl Headline {
    /// The instant used for leak/press-release precedence: the earlier of the
    /// declared and estimated times, when either is known.
    pub fn effective_time(&self) -> Option<DateTime<Utc>> {
        match (self.declared_time, self.estimated_time) {
            (Some(d), Some(e)) => Some(d.min(e)),
            (Some(d), None) => Some(d),
            (None, Some(e)) => Some(e),
            (None, None) => None,
        }
    }
}

/// Stable headline id derived from (source, url).
pub fn headline_id(source: &str, url: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(source.as_bytes());
    hasher.update([0]);
    hasher.update(url.as_bytes());
    let digest = hasher.finalize();
    let mut id = String::with_capacity(12);
    for byte in &digest[..6] {
        id.push_str(&format!("{byte:02x}"));
    }
    id
}

/// Ordered collection of headlines with a source → kind registry.
///
/// No two headlines share a (source, url) pair; iteration order is insertion
/// order. A constructed corpus is immutable from the consumer's point of view
/// and safe to share across threads.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    headlines: Vec<Headline>,
    source_registry: BTreeMap<String, HeadlineKind>,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a headline, enforcing corpus invariants.
    ///
    /// Returns `Ok(false)` when the (source, url) pair is already present
    /// (the duplicate is dropped).
    pub fn push(&mut self, headline: Headline) -> Result<bool, CorpusError> {
        if headline.text.is_empty() {
            return Err(CorpusError::BlankText);
        }
        if let Some(registered) = self.source_registry.get(&headline.source) {
            if *registered != headline.kind {
                return Err(CorpusError::SourceKindConflict {
                    name: headline.source.clone(),
                    registered: *registered,
                    got: headline.kind,
                });
            }
        }
        if self
            .headlines
            .iter()
            .any(|h| h.source == headline.source && h.url == headline.url)
        {
            return Ok(false);
        }
        self.source_registry
            .insert(headline.source.clone(), headline.kind);
        self.headlines.push(headline);
        Ok(true)
    }

    pub fn headlines(&self) -> &[Headline] {
        &self.headlines
    }

    pub fn len(&self) -> usize {
        self.headlines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.headlines.is_empty()
    }

    pub fn source_registry(&self) -> &BTreeMap<String, HeadlineKind> {
        &self.source_registry
    }

    pub fn get(&self, id: &str) -> Option<&Headline> {
        self.headlines.iter().find(|h| h.id == id)
    }

    /// Headlines of one kind, in insertion order.
    pub fn of_kind(&self, kind: HeadlineKind) -> impl Iterator<Item = &Headline> {
        self.headlines.iter().filter(move |h| h.kind == kind)
    }

    /// Sources registered with `kind`.
    pub fn sources_of_kind(&self, kind: HeadlineKind) -> Vec<String> {
        self.source_registry
            .iter()
            .filter(|(_, k)| **k == kind)
            .map(|(s, _)| s.clone())
            .collect()
    }

    /// Fold another corpus into this one. Duplicate (source, url) pairs from
    /// `other` are dropped; the count of dropped entries is returned.
    pub fn merge(&mut self, other: Corpus) -> Result<usize, CorpusError> {
        let mut dropped = 0;
        for h in other.headlines {
            if !self.push(h)? {
                dropped += 1;
            }
        }
        Ok(dropped)
    }

    /// Replace the estimated time of the headline with `id`.
    pub(crate) fn set_estimated_time(&mut self, id: &str, time: Option<DateTime<Utc>>) {
        if let Some(h) = self.headlines.iter_mut().find(|h| h.id == id) {
            h.estimated_time = time;
        }
    }

    /// Write the corpus as JSONL, one headline record per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), CorpusError> {
        for h in &self.headlines {
            let record = JsonRecord {
                source: h.source.clone(),
                kind: h.kind,
                url: h.url.clone(),
                text: h.text.clone(),
                declared_time: h.declared_time.map(rfc3339),
                estimated_time: h.estimated_time.map(rfc3339),
            };
            let line = serde_json::to_string(&record)?;
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn write_jsonl_file(&self, path: &Path) -> Result<(), CorpusError> {
        let file = File::create(path).map_err(|e| CorpusError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        self.write_jsonl(file)
    }
}

fn rfc3339(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// On-disk JSONL headline record.
#[derive(Debug, Serialize, Deserialize)]
struct JsonRecord {
    source: String,
    kind: HeadlineKind,
    url: String,
    text: String,
    declared_time: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    estimated_time: Option<String>,
}

/// Where a stopword list came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopwordProvenance {
    BuiltinGeneral,
    CustomDomain,
}

/// A set of lowercase stopword lemmas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordSet {
    base_words: std::collections::BTreeSet<String>,
    provenance: StopwordProvenance,
}

const GENERAL_STOPWORDS: &str = include_str!("../data/general_stopwords.txt");
const CUSTOM_STOPWORDS: &str = include_str!("../data/custom_stopwords.txt");

impl StopwordSet {
    /// General English stopwords shipped with the crate.
    pub fn builtin_general() -> Self {
        Self::from_lines(GENERAL_STOPWORDS, StopwordProvenance::BuiltinGeneral)
            .expect("builtin general stopword list is well-formed")
    }

    /// Seed list of domain stopwords (base forms plus inflections).
    pub fn builtin_custom() -> Self {
        Self::from_lines(CUSTOM_STOPWORDS, StopwordProvenance::CustomDomain)
            .expect("builtin custom stopword list is well-formed")
    }

    pub fn from_words<I, S>(words: I, provenance: StopwordProvenance) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut base_words = std::collections::BTreeSet::new();
        for w in words {
            let w = w.as_ref().trim().to_lowercase();
            if w.is_empty() {
                continue;
            }
            if w.chars().any(char::is_whitespace) {
                return Err(CorpusError::InvalidStopword(w));
            }
            base_words.insert(w);
        }
        Ok(Self {
            base_words,
            provenance,
        })
    }

    /// Parse the one-word-per-line stopword format; `#` starts a comment line.
    pub fn from_lines(text: &str, provenance: StopwordProvenance) -> Result<Self, CorpusError> {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        Self::from_words(words, provenance)
    }

    pub fn load(path: &Path, provenance: StopwordProvenance) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|e| CorpusError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_lines(&text, provenance)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.base_words.contains(word)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.base_words.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.base_words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base_words.is_empty()
    }

    pub fn provenance(&self) -> StopwordProvenance {
        self.provenance
    }
}

/// Errors from corpus construction and persistence.
#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("headline text is blank after normalization")]
    BlankText,
    #[error("source {name:?} already registered as {registered}, record says {got}")]
    SourceKindConflict {
        name: String,
        registered: HeadlineKind,
        got: HeadlineKind,
    },
    #[error("invalid headline kind {0:?}")]
    InvalidKind(String),
    #[error("stopword {0:?} contains whitespace")]
    InvalidStopword(String),
    #[error("{failed} of {total} lines failed to parse; first error at line {first_line}: {first_reason}")]
    TooManyRejects {
        failed: usize,
        total: usize,
        first_line: usize,
        first_reason: String,
    },
    #[error("tsv ingestion requires an explicit headline kind")]
    TsvNeedsKind,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Write(#[from] std::io::Error),
}

/// Headline file formats accepted by [`ingest`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    Tsv,
}

/// One rejected input line with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedLine {
    pub line: usize,
    pub reason: String,
}

/// Result of an ingestion run: the corpus plus per-line diagnostics.
#[derive(Debug)]
pub struct IngestOutcome {
    pub corpus: Corpus,
    pub duplicate_count: usize,
    pub rejects: Vec<RejectedLine>,
}

impl IngestOutcome {
    pub fn is_clean(&self) -> bool {
        self.rejects.is_empty()
    }
}

/// Ingest a headline file.
///
/// `expected_kind` validates record kinds when given (and supplies the kind
/// for TSV rows, which have none). Malformed records are rejected per line;
/// the whole run aborts only when more than half of the lines fail.
/// Duplicate (source, url) pairs are dropped and counted.
pub fn ingest(
    path: &Path,
    format: CorpusFormat,
    expected_kind: Option<HeadlineKind>,
) -> Result<IngestOutcome, CorpusError> {
    let file = File::open(path).map_err(|e| CorpusError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    ingest_reader(BufReader::new(file), format, expected_kind)
}

pub fn ingest_reader<R: BufRead>(
    reader: R,
    format: CorpusFormat,
    expected_kind: Option<HeadlineKind>,
) -> Result<IngestOutcome, CorpusError> {
    if format == CorpusFormat::Tsv && expected_kind.is_none() {
        return Err(CorpusError::TsvNeedsKind);
    }
    let mut corpus = Corpus::new();
    let mut rejects = Vec::new();
    let mut duplicate_count = 0;
    let mut total = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        total += 1;
        let parsed = match format {
            CorpusFormat::Jsonl => parse_jsonl_record(&line),
            CorpusFormat::Tsv => parse_tsv_record(&line),
        };
        let record = match parsed {
            Ok(r) => r,
            Err(reason) => {
                rejects.push(RejectedLine {
                    line: line_no,
                    reason,
                });
                continue;
            }
        };
        match build_headline(record, expected_kind) {
            Ok(headline) => match corpus.push(headline) {
                Ok(true) => {}
                Ok(false) => duplicate_count += 1,
                Err(e) => rejects.push(RejectedLine {
                    line: line_no,
                    reason: e.to_string(),
                }),
            },
            Err(reason) => rejects.push(RejectedLine {
                line: line_no,
                reason,
            }),
        }
    }

    if total > 0 && rejects.len() * 2 > total {
        let first = &rejects[0];
        return Err(CorpusError::TooManyRejects {
            failed: rejects.len(),
            total,
            first_line: first.line,
            first_reason: first.reason.clone(),
        });
    }
    Ok(IngestOutcome {
        corpus,
        duplicate_count,
        rejects,
    })
}

struct RawRecord {
    source: String,
    kind: Option<HeadlineKind>,
    url: String,
    text: String,
    declared_time: Option<String>,
    estimated_time: Option<String>,
}

fn parse_jsonl_record(line: &str) -> Result<RawRecord, String> {
    let record: JsonRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    Ok(RawRecord {
        source: record.source,
        kind: Some(record.kind),
        url: record.url,
        text: record.text,
        declared_time: record.declared_time,
        estimated_time: record.estimated_time,
    })
}

/// TSV row: `source <TAB> url <TAB> text [<TAB> declared_time]`.
fn parse_tsv_record(line: &str) -> Result<RawRecord, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() < 3 || fields.len() > 4 {
        return Err(format!("expected 3 or 4 tab-separated fields, got {}", fields.len()));
    }
    Ok(RawRecord {
        source: fields[0].to_string(),
        kind: None,
        url: fields[1].to_string(),
        text: fields[2].to_string(),
        declared_time: fields.get(3).map(|s| s.to_string()),
        estimated_time: None,
    })
}

fn build_headline(
    record: RawRecord,
    expected_kind: Option<HeadlineKind>,
) -> Result<Headline, String> {
    let kind = match (record.kind, expected_kind) {
        (Some(k), Some(expected)) if k != expected => {
            return Err(format!("record kind {k} does not match declared kind {expected}"));
        }
        (Some(k), _) => k,
        (None, Some(expected)) => expected,
        (None, None) => return Err("record carries no kind".to_string()),
    };
    let source = record.source.trim().to_string();
    if source.is_empty() {
        return Err("source is empty".to_string());
    }
    let url = record.url.trim().to_string();
    if url.is_empty() || !url.contains("://") {
        return Err(format!("url {url:?} is not absolute"));
    }
    let text = clean_text(&record.text);
    if text.is_empty() {
        return Err("headline text is blank after normalization".to_string());
    }
    let declared_time = match record.declared_time {
        Some(s) => Some(parse_rfc3339(&s)?),
        None => None,
    };
    let estimated_time = match record.estimated_time {
        Some(s) => Some(parse_rfc3339(&s)?),
        None => None,
    };
    Ok(Headline {
        id: headline_id(&source, &url),
        source,
        kind,
        url,
        text,
        declared_time,
        estimated_time,
    })
}

fn parse_rfc3339(s: &str) -> Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| format!("bad timestamp {s:?}: {e}"))
}

/// NFC-normalize, collapse whitespace runs to single spaces, and trim,
/// keeping the original casing. This is the form stored in [`Headline::text`].
pub fn clean_text(raw: &str) -> String {
    let composed: String = raw.nfc().collect();
    let mut out = String::with_capacity(composed.len());
    let mut pending_space = false;
    for c in composed.chars() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(c);
        }
    }
    out
}

/// Full normalization: NFC, lowercase, whitespace runs collapsed, trimmed.
///
/// Total and idempotent; this is the form used for keys and matching.
pub fn normalize(raw: &str) -> String {
    clean_text(raw).to_lowercase()
}

/// A token with its character span in the text it was cut from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSpan {
    pub text: String,
    /// Char offset of the first char, inclusive.
    pub char_start: usize,
    /// Char offset one past the last char.
    pub char_end: usize,
}

/// Tokenize into maximal alphanumeric runs, keeping char offsets.
///
/// Splits on whitespace and punctuation; mixed tokens like `s10` and `5g`
/// survive intact.
pub fn token_spans(text: &str) -> Vec<TokenSpan> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut start = 0usize;
    for (pos, c) in text.chars().enumerate() {
        if c.is_alphanumeric() {
            if current.is_empty() {
                start = pos;
            }
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(TokenSpan {
                text: std::mem::take(&mut current),
                char_start: start,
                char_end: pos,
            });
        }
    }
    if !current.is_empty() {
        let end = start + current.chars().count();
        tokens.push(TokenSpan {
            text: current,
            char_start: start,
            char_end: end,
        });
    }
    tokens
}

/// Tokenize normalized text into an ordered token list.
pub fn tokenize(text: &str) -> Vec<String> {
    token_spans(text).into_iter().map(|t| t.text).collect()
}

/// Extract the substring covering chars `[start, end)`.
pub fn slice_chars(text: &str, start: usize, end: usize) -> &str {
    let mut indices = text.char_indices().map(|(i, _)| i);
    let byte_start = indices.clone().nth(start).unwrap_or(text.len());
    let byte_end = indices.nth(end).unwrap_or(text.len());
    &text[byte_start..byte_end]
}

/// Normalize a product-name string to space-joined lemmas.
pub fn lemmatize_name(name: &str) -> String {
    tokenize(&normalize(name))
        .iter()
        .map(|t| lemmatize(t))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Canonical product-name form: lemmatized with custom stopwords removed.
pub fn process_product_name(name: &str, custom_stopwords: &StopwordSet) -> String {
    tokenize(&normalize(name))
        .iter()
        .filter_map(|t| {
            let lemma = lemmatize(t);
            if custom_stopwords.contains(t) || custom_stopwords.contains(&lemma) {
                None
            } else {
                Some(lemma)
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Drop every token whose lemma appears in any of the given sets,
/// preserving the order of survivors.
pub fn remove_stopwords(tokens: &[String], sets: &[&StopwordSet]) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| {
            let lemma = lemmatize(t);
            !sets.iter().any(|s| s.contains(&lemma) || s.contains(t))
        })
        .cloned()
        .collect()
}

/// Forms that the suffix rules would mangle, mapped straight to their lemma.
const IRREGULAR_LEMMAS: &[(&str, &str)] = &[
    ("agreed", "agree"),
    ("am", "be"),
    ("are", "be"),
    ("been", "be"),
    ("being", "be"),
    ("bought", "buy"),
    ("broke", "break"),
    ("broken", "break"),
    ("brought", "bring"),
    ("built", "build"),
    ("came", "come"),
    ("children", "child"),
    ("chose", "choose"),
    ("chosen", "choose"),
    ("coming", "come"),
    ("did", "do"),
    ("does", "do"),
    ("doing", "do"),
    ("done", "do"),
    ("feet", "foot"),
    ("focused", "focus"),
    ("focusing", "focus"),
    ("found", "find"),
    ("freed", "free"),
    ("gave", "give"),
    ("getting", "get"),
    ("given", "give"),
    ("giving", "give"),
    ("goes", "go"),
    ("going", "go"),
    ("gone", "go"),
    ("got", "get"),
    ("gotten", "get"),
    ("guaranteed", "guarantee"),
    ("had", "have"),
    ("has", "have"),
    ("having", "have"),
    ("held", "hold"),
    ("hidden", "hide"),
    ("hid", "hide"),
    ("is", "be"),
    ("kept", "keep"),
    ("knew", "know"),
    ("known", "know"),
    ("leaves", "leave"),
    ("led", "lead"),
    ("left", "leave"),
    ("lost", "lose"),
    ("made", "make"),
    ("making", "make"),
    ("meant", "mean"),
    ("men", "man"),
    ("met", "meet"),
    ("news", "news"),
    ("ran", "run"),
    ("said", "say"),
    ("sat", "sit"),
    ("saw", "see"),
    ("seen", "see"),
    ("sent", "send"),
    ("series", "series"),
    ("shown", "show"),
    ("showed", "show"),
    ("sold", "sell"),
    ("species", "species"),
    ("spent", "spend"),
    ("taken", "take"),
    ("taking", "take"),
    ("told", "tell"),
    ("took", "take"),
    ("using", "use"),
    ("was", "be"),
    ("went", "go"),
    ("were", "be"),
    ("women", "woman"),
    ("won", "win"),
    ("writing", "write"),
    ("written", "write"),
    ("wrote", "write"),
];

/// Nouns whose trailing `s` is part of the lemma.
const PLURAL_EXCEPTIONS: &[&str] = &["bias", "lens", "plus", "ios"];

fn irregular_lemma(token: &str) -> Option<&'static str> {
    IRREGULAR_LEMMAS
        .binary_search_by_key(&token, |(form, _)| form)
        .ok()
        .map(|i| IRREGULAR_LEMMAS[i].1)
}

/// Rule-based lemmatizer for lowercase tokens.
///
/// Plural `-s`/`-es` stripped with an exceptions list, `-ing`/`-ed`
/// inflections reduced with undoubling and e-restoration, irregular forms
/// looked up in a table. Tokens containing a digit (product codes like
/// `s10`, `5g`) pass through unchanged.
pub fn lemmatize(token: &str) -> String {
    if token.chars().any(|c| c.is_ascii_digit()) {
        return token.to_string();
    }
    if let Some(lemma) = irregular_lemma(token) {
        return lemma.to_string();
    }
    let n = token.len();
    if n <= 3 {
        return token.to_string();
    }
    if let Some(stem) = token.strip_suffix("ies") {
        if n > 4 {
            return format!("{stem}y");
        }
    }
    if let Some(stem) = token.strip_suffix("es") {
        if ends_with_sibilant(stem) {
            return stem.to_string();
        }
    }
    if token.ends_with('s')
        && !token.ends_with("ss")
        && !token.ends_with("us")
        && !token.ends_with("is")
        && !PLURAL_EXCEPTIONS.contains(&token)
    {
        return token[..n - 1].to_string();
    }
    if let Some(stem) = token.strip_suffix("ied") {
        if n > 4 {
            return format!("{stem}y");
        }
        // died -> die, tied -> tie
        return format!("{stem}ie");
    }
    if token.ends_with("eed") {
        return token.to_string();
    }
    if let Some(stem) = token.strip_suffix("ed") {
        if stem.len() >= 2 && has_vowel(stem) {
            return reduce_verb_stem(stem);
        }
    }
    if let Some(stem) = token.strip_suffix("ing") {
        if stem.len() >= 3 && has_vowel(stem) {
            return reduce_verb_stem(stem);
        }
    }
    token.to_string()
}

fn ends_with_sibilant(stem: &str) -> bool {
    stem.ends_with("ss")
        || stem.ends_with('x')
        || stem.ends_with('z')
        || stem.ends_with('o')
        || stem.ends_with("ch")
        || stem.ends_with("sh")
}

fn has_vowel(s: &str) -> bool {
    s.chars().any(is_vowel)
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

/// Undouble a doubled final consonant (planned → plan) or restore a final
/// `e` that the inflection swallowed (alleg → allege, announc → announce).
fn reduce_verb_stem(stem: &str) -> String {
    let chars: Vec<char> = stem.chars().collect();
    let n = chars.len();
    if n >= 2 && chars[n - 1] == chars[n - 2] {
        let c = chars[n - 1];
        if !c.is_ascii_digit() && !is_vowel(c) && !matches!(c, 'l' | 's' | 'f' | 'z') {
            return stem[..stem.len() - 1].to_string();
        }
    }
    let last = chars[n - 1];
    let restore = match last {
        'c' | 'v' | 'u' => true,
        'g' | 'z' | 's' => n >= 2 && is_vowel(chars[n - 2]),
        _ => false,
    };
    if restore {
        return format!("{stem}e");
    }
    stem.to_string()
}
