//! URL first-appearance estimation: several independent dating estimators
//! queried per URL, aggregated by taking the earliest time.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use chrono::{DateTime, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;

#[derive(Debug, thiserror::Error)]
pub enum ChronologyError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("fixture line {line}: {reason}")]
    MalformedFixture { line: usize, reason: String },
    #[error("estimator id {0:?} registered twice")]
    DuplicateEstimator(String),
    #[error("archive query template must contain {{url}}: {0:?}")]
    BadArchiveTemplate(String),
    #[error("no estimate for url")]
    Undatable,
}

/// How much trust an estimate carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Confidence {
    #[serde(rename = "declared")]
    Declared,
    #[serde(rename = "archived")]
    Archived,
    #[serde(rename = "inferred")]
    Inferred,
}

/// One estimator's opinion of a URL's creation time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimestampEstimate {
    pub url: String,
    pub estimator_id: String,
    pub time: DateTime<Utc>,
    pub confidence: Confidence,
}

/// A TSV-backed url → time table (fixture and backlink files share the
/// format `url<TAB>RFC3339<TAB>source_tag`).
#[derive(Debug, Clone, Default)]
pub struct TimeTable {
    entries: BTreeMap<String, Vec<(DateTime<Utc>, String)>>,
}

impl TimeTable {
    pub fn parse_tsv(text: &str) -> Result<Self, ChronologyError> {
        let mut entries: BTreeMap<String, Vec<(DateTime<Utc>, String)>> = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(ChronologyError::MalformedFixture {
                    line: line_no,
                    reason: format!("expected 3 tab-separated fields, got {}", fields.len()),
                });
            }
            let time = DateTime::parse_from_rfc3339(fields[1].trim())
                .map_err(|e| ChronologyError::MalformedFixture {
                    line: line_no,
                    reason: format!("bad timestamp {:?}: {e}", fields[1]),
                })?
                .with_timezone(&Utc);
            entries
                .entry(fields[0].trim().to_string())
                .or_default()
                .push((time, fields[2].trim().to_string()));
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, ChronologyError> {
        let text = std::fs::read_to_string(path).map_err(|e| ChronologyError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse_tsv(&text)
    }

    pub fn times_for(&self, url: &str) -> &[(DateTime<Utc>, String)] {
        self.entries.get(url).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Estimator behavior. Live search and social APIs are out of scope; the
/// backlink estimator reads a pre-collected local table instead.
#[derive(Debug, Clone)]
pub enum EstimatorKind {
    /// Local url → time table, trusted as declared.
    FixtureFile(TimeTable),
    /// HEAD request; honors `Last-Modified` only, 3 redirects max.
    HttpHeader,
    /// GET against an archive API; `{url}` in the template is replaced by
    /// the (percent-encoded) target URL. Accepts a JSON `timestamp` field
    /// or a bare 14-digit `YYYYMMDDhhmmss` token in the response.
    ArchiveLookup { query_template: String },
    /// Local table of backlink first-seen times.
    BacklinkStub(TimeTable),
}

struct Estimator {
    id: String,
    kind: EstimatorKind,
}

/// Ordered collection of uniquely named estimators.
#[derive(Default)]
pub struct EstimatorRegistry {
    estimators: Vec<Estimator>,
}

impl EstimatorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, id: &str, kind: EstimatorKind) -> Result<(), ChronologyError> {
        if self.estimators.iter().any(|e| e.id == id) {
            return Err(ChronologyError::DuplicateEstimator(id.to_string()));
        }
        if let EstimatorKind::ArchiveLookup { query_template } = &kind {
            if !query_template.contains("{url}") {
                return Err(ChronologyError::BadArchiveTemplate(query_template.clone()));
            }
        }
        self.estimators.push(Estimator {
            id: id.to_string(),
            kind,
        });
        Ok(())
    }

    pub fn ids(&self) -> Vec<&str> {
        self.estimators.iter().map(|e| e.id.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.estimators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimators.is_empty()
    }
}

/// One estimator's failure on one URL.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EstimatorFailure {
    pub estimator_id: String,
    pub reason: String,
}

/// Successes and failures of one URL's estimator sweep.
#[derive(Debug, Clone, Default)]
pub struct EstimateOutcome {
    pub estimates: Vec<TimestampEstimate>,
    pub failures: Vec<EstimatorFailure>,
}

/// Query every estimator for one URL.
///
/// Estimators run concurrently, each under `timeout`; one failing or timing
/// out never aborts the others. Results come back in registry order.
pub fn estimate(url: &str, registry: &EstimatorRegistry, timeout: Duration) -> EstimateOutcome {
    let mut slots: Vec<Option<Result<Vec<TimestampEstimate>, String>>> =
        (0..registry.estimators.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for est in &registry.estimators {
            handles.push(scope.spawn(move || run_estimator(url, est, timeout)));
        }
        for (slot, handle) in slots.iter_mut().zip(handles) {
            *slot = Some(handle.join().unwrap_or_else(|_| Err("estimator panicked".into())));
        }
    });
    let mut outcome = EstimateOutcome::default();
    for (est, slot) in registry.estimators.iter().zip(slots) {
        match slot.expect("every estimator slot filled") {
            Ok(estimates) => outcome.estimates.extend(estimates),
            Err(reason) => outcome.failures.push(EstimatorFailure {
                estimator_id: est.id.clone(),
                reason,
            }),
        }
    }
    outcome
}

fn run_estimator(
    url: &str,
    est: &Estimator,
    timeout: Duration,
) -> Result<Vec<TimestampEstimate>, String> {
    match &est.kind {
        EstimatorKind::FixtureFile(table) => Ok(table_estimates(url, &est.id, table, Confidence::Declared)),
        EstimatorKind::BacklinkStub(table) => {
            Ok(table_estimates(url, &est.id, table, Confidence::Inferred))
        }
        EstimatorKind::HttpHeader => {
            let time = head_last_modified(url, timeout)?;
            Ok(vec![TimestampEstimate {
                url: url.to_string(),
                estimator_id: est.id.clone(),
                time,
                confidence: Confidence::Inferred,
            }])
        }
        EstimatorKind::ArchiveLookup { query_template } => {
            let time = archive_earliest(url, query_template, timeout)?;
            Ok(vec![TimestampEstimate {
                url: url.to_string(),
                estimator_id: est.id.clone(),
                time,
                confidence: Confidence::Archived,
            }])
        }
    }
}

fn table_estimates(
    url: &str,
    estimator_id: &str,
    table: &TimeTable,
    confidence: Confidence,
) -> Vec<TimestampEstimate> {
    table
        .times_for(url)
        .iter()
        .map(|(time, _tag)| TimestampEstimate {
            url: url.to_string(),
            estimator_id: estimator_id.to_string(),
            time: *time,
            confidence,
        })
        .collect()
}

fn http_client(timeout: Duration) -> Result<reqwest::blocking::Client, String> {
    reqwest::blocking::Client::builder()
        .timeout(timeout)
        .redirect(reqwest::redirect::Policy::limited(3))
        .build()
        .map_err(|e| e.to_string())
}

fn head_last_modified(url: &str, timeout: Duration) -> Result<DateTime<Utc>, String> {
    let client = http_client(timeout)?;
    let response = client.head(url).send().map_err(|e| e.to_string())?;
    let header = response
        .headers()
        .get(reqwest::header::LAST_MODIFIED)
        .ok_or("no Last-Modified header")?;
    let value = header.to_str().map_err(|e| e.to_string())?;
    DateTime::parse_from_rfc2822(value)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| format!("bad Last-Modified {value:?}: {e}"))
}

fn archive_earliest(
    url: &str,
    query_template: &str,
    timeout: Duration,
) -> Result<DateTime<Utc>, String> {
    let encoded = percent_encode(url);
    let query = query_template.replace("{url}", &encoded);
    let client = http_client(timeout)?;
    let body = client
        .get(&query)
        .send()
        .map_err(|e| e.to_string())?
        .text()
        .map_err(|e| e.to_string())?;
    parse_archive_response(&body).ok_or_else(|| "no timestamp in archive response".to_string())
}

fn percent_encode(url: &str) -> String {
    let mut out = String::with_capacity(url.len());
    for byte in url.bytes() {
        match byte {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'.' | b'_' | b'~' => {
                out.push(byte as char)
            }
            _ => out.push_str(&format!("%{byte:02X}")),
        }
    }
    out
}

/// Pull a creation time out of an archive API response: the earliest
/// `timestamp` field of a JSON body, else the first 14-digit
/// `YYYYMMDDhhmmss` token anywhere in the text.
pub fn parse_archive_response(body: &str) -> Option<DateTime<Utc>> {
    if let Ok(value) = serde_json::from_str::<serde_json::Value>(body) {
        let mut found = Vec::new();
        collect_timestamps(&value, &mut found);
        if let Some(min) = found.into_iter().min() {
            return Some(min);
        }
    }
    scan_compact_timestamp(body)
}

fn collect_timestamps(value: &serde_json::Value, out: &mut Vec<DateTime<Utc>>) {
    match value {
        serde_json::Value::Object(map) => {
            for (key, v) in map {
                if key == "timestamp" {
                    if let Some(t) = timestamp_value(v) {
                        out.push(t);
                    }
                }
                collect_timestamps(v, out);
            }
        }
        serde_json::Value::Array(items) => {
            for v in items {
                collect_timestamps(v, out);
            }
        }
        _ => {}
    }
}

fn timestamp_value(value: &serde_json::Value) -> Option<DateTime<Utc>> {
    match value {
        serde_json::Value::String(s) => {
            if let Ok(t) = DateTime::parse_from_rfc3339(s) {
                return Some(t.with_timezone(&Utc));
            }
            parse_compact(s.trim())
        }
        serde_json::Value::Number(n) => {
            let secs = n.as_i64()?;
            DateTime::<Utc>::from_timestamp(secs, 0)
        }
        _ => None,
    }
}

fn parse_compact(s: &str) -> Option<DateTime<Utc>> {
    if s.len() != 14 || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    NaiveDateTime::parse_from_str(s, "%Y%m%d%H%M%S")
        .ok()
        .map(|t| t.and_utc())
}

fn scan_compact_timestamp(body: &str) -> Option<DateTime<Utc>> {
    let bytes = body.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i - start == 14 {
                if let Some(t) = parse_compact(&body[start..i]) {
                    return Some(t);
                }
            }
        } else {
            i += 1;
        }
    }
    None
}

/// The min-rule winner over a URL's estimates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregatedTime {
    pub time: DateTime<Utc>,
    pub estimator_id: String,
}

/// Earliest estimate wins; ties go to the lexicographically smallest
/// estimator id so the winner is deterministic.
pub fn aggregate(estimates: &[TimestampEstimate]) -> Result<AggregatedTime, ChronologyError> {
    estimates
        .iter()
        .min_by(|a, b| {
            a.time
                .cmp(&b.time)
                .then_with(|| a.estimator_id.cmp(&b.estimator_id))
        })
        .map(|e| AggregatedTime {
            time: e.time,
            estimator_id: e.estimator_id.clone(),
        })
        .ok_or(ChronologyError::Undatable)
}

/// A dated corpus plus per-headline diagnostics.
#[derive(Debug)]
pub struct DatingOutcome {
    pub corpus: Corpus,
    /// Headline ids with no estimator hit.
    pub undatable: Vec<String>,
    pub failure_count: usize,
}

/// Number of worker threads for the URL sweep.
const DATE_WORKERS: usize = 8;

/// Per-headline sweep result: aggregated time (if any) and failure count.
type SweepResults = BTreeMap<String, (Option<DateTime<Utc>>, usize)>;

/// Fill `estimated_time` for every headline by estimate+aggregate.
///
/// URLs are processed in parallel; the corpus update happens afterwards in
/// one commit phase, so the result is independent of scheduling. Headlines
/// with no estimator hit keep their previous estimated_time and are
/// reported as undatable. Re-running with the same registry is a no-op.
pub fn date_corpus(
    corpus: &Corpus,
    registry: &EstimatorRegistry,
    timeout: Duration,
) -> DatingOutcome {
    let jobs: Vec<(String, String)> = corpus
        .headlines()
        .iter()
        .map(|h| (h.id.clone(), h.url.clone()))
        .collect();
    let results: Mutex<SweepResults> = Mutex::new(BTreeMap::new());
    let cursor = std::sync::atomic::AtomicUsize::new(0);

    std::thread::scope(|scope| {
        for _ in 0..DATE_WORKERS.min(jobs.len().max(1)) {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let (id, url) = &jobs[i];
                let outcome = estimate(url, registry, timeout);
                let time = aggregate(&outcome.estimates).ok().map(|a| a.time);
                results
                    .lock()
                    .unwrap()
                    .insert(id.clone(), (time, outcome.failures.len()));
            });
        }
    });

    let results = results.into_inner().unwrap();
    let mut dated = corpus.clone();
    let mut undatable = Vec::new();
    let mut failure_count = 0usize;
    for h in corpus.headlines() {
        let (time, failures) = results.get(&h.id).cloned().unwrap_or((None, 0));
        failure_count += failures;
        match time {
            Some(t) => dated.set_estimated_time(&h.id, Some(t)),
            None => undatable.push(h.id.clone()),
        }
    }
    DatingOutcome {
        corpus: dated,
        undatable,
        failure_count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{Read, Write};
    use std::net::TcpListener;

    fn utc(s: &str) -> DateTime<Utc> {
        DateTime::parse_from_rfc3339(s).unwrap().with_timezone(&Utc)
    }

    fn fixture_registry(rows: &str) -> EstimatorRegistry {
        let mut registry = EstimatorRegistry::new();
        registry
            .push(
                "fixtures",
                EstimatorKind::FixtureFile(TimeTable::parse_tsv(rows).unwrap()),
            )
            .unwrap();
        registry
    }

    #[test]
    fn fixture_estimator_returns_table_row() {
        let registry = fixture_registry(
            "https://ap.example/s10\t2018-07-07T07:54:44Z\tcrawl\n",
        );
        let outcome = estimate("https://ap.example/s10", &registry, Duration::from_secs(1));
        assert_eq!(outcome.estimates.len(), 1);
        assert_eq!(outcome.estimates[0].time, utc("2018-07-07T07:54:44Z"));
        assert_eq!(outcome.estimates[0].confidence, Confidence::Declared);
        assert!(outcome.failures.is_empty());
    }

    #[test]
    fn unknown_url_yields_no_estimates() {
        let registry = fixture_registry("https://ap.example/s10\t2018-07-07T07:54:44Z\tcrawl\n");
        let outcome = estimate("https://ap.example/other", &registry, Duration::from_secs(1));
        assert!(outcome.estimates.is_empty());
        assert!(matches!(
            aggregate(&outcome.estimates),
            Err(ChronologyError::Undatable)
        ));
    }

    #[test]
    fn disagreeing_estimators_both_returned_min_wins() {
        let mut registry = EstimatorRegistry::new();
        registry
            .push(
                "a",
                EstimatorKind::FixtureFile(
                    TimeTable::parse_tsv("https://x/1\t2018-07-08T00:00:00Z\ta\n").unwrap(),
                ),
            )
            .unwrap();
        registry
            .push(
                "b",
                EstimatorKind::BacklinkStub(
                    TimeTable::parse_tsv("https://x/1\t2018-07-07T07:54:44Z\tb\n").unwrap(),
                ),
            )
            .unwrap();
        let outcome = estimate("https://x/1", &registry, Duration::from_secs(1));
        assert_eq!(outcome.estimates.len(), 2);
        let agg = aggregate(&outcome.estimates).unwrap();
        assert_eq!(agg.time, utc("2018-07-07T07:54:44Z"));
        assert_eq!(agg.estimator_id, "b");
    }

    #[test]
    fn aggregate_is_order_free_and_breaks_ties_by_id() {
        let mk = |id: &str, t: &str| TimestampEstimate {
            url: "https://x/1".to_string(),
            estimator_id: id.to_string(),
            time: utc(t),
            confidence: Confidence::Inferred,
        };
        let a = mk("zzz", "2018-07-07T07:54:44Z");
        let b = mk("aaa", "2018-07-07T07:54:44Z");
        let c = mk("mid", "2018-08-01T00:00:00Z");
        for perm in [
            vec![a.clone(), b.clone(), c.clone()],
            vec![c.clone(), b.clone(), a.clone()],
            vec![b.clone(), c.clone(), a.clone()],
        ] {
            let agg = aggregate(&perm).unwrap();
            assert_eq!(agg.time, utc("2018-07-07T07:54:44Z"));
            assert_eq!(agg.estimator_id, "aaa");
        }
    }

    #[test]
    fn registry_rejects_duplicate_ids_and_bad_templates() {
        let mut registry = EstimatorRegistry::new();
        registry.push("x", EstimatorKind::HttpHeader).unwrap();
        assert!(registry.push("x", EstimatorKind::HttpHeader).is_err());
        assert!(registry
            .push(
                "archive",
                EstimatorKind::ArchiveLookup {
                    query_template: "https://archive.example/api?u=URL".to_string()
                }
            )
            .is_err());
    }

    #[test]
    fn fixture_tsv_rejects_malformed_rows() {
        assert!(TimeTable::parse_tsv("https://x/1\tnot-a-time\ttag\n").is_err());
        assert!(TimeTable::parse_tsv("https://x/1\t2018-07-07T07:54:44Z\n").is_err());
        let ok = TimeTable::parse_tsv("# comment\n\nhttps://x/1\t2018-07-07T07:54:44Z\ttag\n");
        assert_eq!(ok.unwrap().len(), 1);
    }

    #[test]
    fn archive_response_parsing_accepts_both_shapes() {
        // Wayback-style nesting.
        let nested = r#"{"archived_snapshots": {"closest": {"timestamp": "20180707075444", "available": true}}}"#;
        assert_eq!(
            parse_archive_response(nested),
            Some(utc("2018-07-07T07:54:44Z"))
        );
        // RFC3339 string value.
        let rfc = r#"{"timestamp": "2018-07-07T07:54:44Z"}"#;
        assert_eq!(parse_archive_response(rfc), Some(utc("2018-07-07T07:54:44Z")));
        // Earliest of several wins.
        let multi = r#"{"snapshots": [{"timestamp": "20190220085956"}, {"timestamp": "20180707075444"}]}"#;
        assert_eq!(
            parse_archive_response(multi),
            Some(utc("2018-07-07T07:54:44Z"))
        );
        // Bare token in a non-JSON body.
        assert_eq!(
            parse_archive_response("snapshot at 20180707075444 retrieved"),
            Some(utc("2018-07-07T07:54:44Z"))
        );
        assert_eq!(parse_archive_response("no dates here"), None);
        // 15-digit runs are not timestamps.
        assert_eq!(parse_archive_response("201807070754441"), None);
    }

    /// Serve each canned response to one connection, in order.
    fn serve(responses: Vec<String>) -> (String, std::thread::JoinHandle<()>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let handle = std::thread::spawn(move || {
            for response in responses {
                let Ok((mut stream, _)) = listener.accept() else {
                    return;
                };
                let mut buf = [0u8; 4096];
                let _ = stream.read(&mut buf);
                let _ = stream.write_all(response.as_bytes());
            }
        });
        (format!("http://{addr}"), handle)
    }

    #[test]
    fn http_head_estimator_parses_last_modified() {
        let (base, handle) = serve(vec![
            "HTTP/1.1 200 OK\r\nLast-Modified: Sat, 07 Jul 2018 07:54:44 GMT\r\nContent-Length: 0\r\n\r\n"
                .to_string(),
        ]);
        let mut registry = EstimatorRegistry::new();
        registry.push("head", EstimatorKind::HttpHeader).unwrap();
        let outcome = estimate(&format!("{base}/post"), &registry, Duration::from_secs(2));
        handle.join().unwrap();
        assert_eq!(outcome.estimates.len(), 1, "failures: {:?}", outcome.failures);
        assert_eq!(outcome.estimates[0].time, utc("2018-07-07T07:54:44Z"));
        assert_eq!(outcome.estimates[0].confidence, Confidence::Inferred);
    }

    #[test]
    fn http_head_estimator_follows_one_redirect() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let handle = std::thread::spawn(move || {
            let redirect = format!(
                "HTTP/1.1 302 Found\r\nLocation: http://{addr}/final\r\nContent-Length: 0\r\n\r\n"
            );
            let ok =
                "HTTP/1.1 200 OK\r\nLast-Modified: Fri, 15 Dec 2017 04:55:38 GMT\r\nContent-Length: 0\r\n\r\n";
            for response in [redirect.as_str(), ok] {
                let Ok((mut stream, _)) = listener.accept() else {
                    return;
                };
                let mut buf = [0u8; 4096];
                let _ = stream.read(&mut buf);
                let _ = stream.write_all(response.as_bytes());
            }
        });
        let mut registry = EstimatorRegistry::new();
        registry.push("head", EstimatorKind::HttpHeader).unwrap();
        let outcome = estimate(
            &format!("http://{addr}/post"),
            &registry,
            Duration::from_secs(2),
        );
        handle.join().unwrap();
        assert_eq!(outcome.estimates.len(), 1, "failures: {:?}", outcome.failures);
        assert_eq!(outcome.estimates[0].time, utc("2017-12-15T04:55:38Z"));
    }

    #[test]
    fn archive_estimator_queries_endpoint() {
        let body = r#"{"archived_snapshots": {"closest": {"timestamp": "20170131092228"}}}"#;
        let response = format!(
            "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{body}",
            body.len()
        );
        let (base, handle) = serve(vec![response]);
        let mut registry = EstimatorRegistry::new();
        registry
            .push(
                "archive",
                EstimatorKind::ArchiveLookup {
                    query_template: format!("{base}/available?url={{url}}"),
                },
            )
            .unwrap();
        let outcome = estimate("https://ap.example/s8", &registry, Duration::from_secs(2));
        handle.join().unwrap();
        assert_eq!(outcome.estimates.len(), 1, "failures: {:?}", outcome.failures);
        assert_eq!(outcome.estimates[0].time, utc("2017-01-31T09:22:28Z"));
        assert_eq!(outcome.estimates[0].confidence, Confidence::Archived);
    }

    #[test]
    fn slow_estimator_fails_without_aborting_others() {
        // A listener that accepts but never responds forces a client timeout.
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let handle = std::thread::spawn(move || {
            let Ok((stream, _)) = listener.accept() else {
                return;
            };
            std::thread::sleep(Duration::from_millis(600));
            drop(stream);
        });
        let mut registry = EstimatorRegistry::new();
        registry.push("head", EstimatorKind::HttpHeader).unwrap();
        registry
            .push(
                "fixtures",
                EstimatorKind::FixtureFile(
                    TimeTable::parse_tsv(&format!(
                        "http://{addr}/post\t2018-07-07T07:54:44Z\tcrawl\n"
                    ))
                    .unwrap(),
                ),
            )
            .unwrap();
        let outcome = estimate(
            &format!("http://{addr}/post"),
            &registry,
            Duration::from_millis(150),
        );
        handle.join().unwrap();
        assert_eq!(outcome.estimates.len(), 1);
        assert_eq!(outcome.estimates[0].estimator_id, "fixtures");
        assert_eq!(outcome.failures.len(), 1);
        assert_eq!(outcome.failures[0].estimator_id, "head");
    }

    #[test]
    fn date_corpus_fills_and_is_idempotent() {
        use crate::corpus::{ingest_reader, CorpusFormat};
        let jsonl = concat!(
            r#"{"source": "AP", "kind": "leak", "url": "https://ap.example/s10", "text": "Galaxy S10 leaked", "declared_time": null}"#,
            "\n",
            r#"{"source": "AP", "kind": "leak", "url": "https://ap.example/undatable", "text": "Mystery phone", "declared_time": null}"#,
        );
        let corpus = ingest_reader(std::io::Cursor::new(jsonl), CorpusFormat::Jsonl, None)
            .unwrap()
            .corpus;
        let registry = fixture_registry("https://ap.example/s10\t2018-07-07T07:54:44Z\tcrawl\n");
        let once = date_corpus(&corpus, &registry, Duration::from_secs(1));
        assert_eq!(once.undatable.len(), 1);
        let dated = &once.corpus.headlines()[0];
        assert_eq!(dated.estimated_time, Some(utc("2018-07-07T07:54:44Z")));
        let twice = date_corpus(&once.corpus, &registry, Duration::from_secs(1));
        assert_eq!(once.corpus, twice.corpus);
    }

    #[test]
    fn effective_time_prefers_earlier_declared() {
        use crate::corpus::{ingest_reader, CorpusFormat};
        let jsonl = r#"{"source": "AP", "kind": "leak", "url": "https://ap.example/s10", "text": "Galaxy S10 leaked", "declared_time": "2018-07-01T00:00:00Z"}"#;
        let corpus = ingest_reader(std::io::Cursor::new(jsonl), CorpusFormat::Jsonl, None)
            .unwrap()
            .corpus;
        let registry = fixture_registry("https://ap.example/s10\t2018-07-07T07:54:44Z\tcrawl\n");
        let outcome = date_corpus(&corpus, &registry, Duration::from_secs(1));
        let h = &outcome.corpus.headlines()[0];
        assert_eq!(h.effective_time(), Some(utc("2018-07-01T00:00:00Z")));
    }
}
