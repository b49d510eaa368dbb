//! Acceptance gate: one test per release criterion, each printing a
//! `criterion N: PASS` line on success.
//!
//!     cargo test --test acceptance -- --nocapture
//!
//! Oracles are recomputed from scratch inside each test (brute-force
//! minima, integer-arithmetic ranks, naive statistics) so a regression in
//! the library cannot hide behind shared helper code.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use chrono::{DateTime, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use leakcred::analytics::{length_stats, sentiment_mean_of_kind, ValenceLexicon};
use leakcred::chronology::{aggregate, Confidence, TimestampEstimate};
use leakcred::corpus::{headline_id, normalize, tokenize, Corpus, Headline, HeadlineKind, StopwordSet};
use leakcred::credibility::CredibilityLedger;
use leakcred::entity::{
    expand_templates, kappa, learn_patterns, percentile_threshold, AnnotationRecord, Gazetteer,
    Recognizer, SpanOrigin, Template, TrainingExample,
};
use leakcred::matching::TruthAssignment;
use leakcred::similarity::jaccard;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn utc(s: &str) -> DateTime<Utc> {
    DateTime::parse_from_rfc3339(s).unwrap().with_timezone(&Utc)
}

// ---------------------------------------------------------------- 1

/// Earliest-estimate aggregation equals a brute-force minimum on 10^4
/// random estimate lists, in under a second.
#[test]
fn criterion_01_aggregate_matches_bruteforce_min() {
    let mut rng = rng(101);
    let started = Instant::now();
    for case in 0..10_000u32 {
        let len = rng.gen_range(1..=12usize);
        let estimates: Vec<TimestampEstimate> = (0..len)
            .map(|i| TimestampEstimate {
                url: format!("https://example.test/{case}"),
                // Duplicate ids and duplicate times both occur, so ties
                // exercise the lexicographic id tiebreak.
                estimator_id: format!("est-{}", rng.gen_range(0..6u8)),
                time: Utc
                    .timestamp_opt(rng.gen_range(0..=1_600_000_000i64 / 1000) * 1000, 0)
                    .unwrap(),
                confidence: if i % 2 == 0 {
                    Confidence::Archived
                } else {
                    Confidence::Inferred
                },
            })
            .collect();

        // Oracle: scan for the minimum time, then the smallest id at it.
        let min_time = estimates.iter().map(|e| e.time).min().unwrap();
        let min_id = estimates
            .iter()
            .filter(|e| e.time == min_time)
            .map(|e| e.estimator_id.as_str())
            .min()
            .unwrap();

        let got = aggregate(&estimates).expect("non-empty list must aggregate");
        assert_eq!(got.time, min_time, "case {case}: wrong winning time");
        assert_eq!(got.estimator_id, min_id, "case {case}: wrong tiebreak");
    }
    assert!(aggregate(&[]).is_err(), "empty list must refuse to date");
    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(1),
        "10^4 aggregations took {elapsed:?}, budget is 1s"
    );
    println!(
        "criterion 1: PASS — aggregate == brute-force min on 10^4 random lists in {elapsed:?}"
    );
}

// ---------------------------------------------------------------- 2

fn assignment(
    blog: &str,
    key: &str,
    t: u8,
    f: u8,
    leak: Option<DateTime<Utc>>,
    pr: Option<DateTime<Utc>>,
) -> TruthAssignment {
    TruthAssignment {
        blog: blog.to_string(),
        product_key: key.to_string(),
        t,
        f,
        first_leak_time: leak,
        first_pr_time: pr,
    }
}

/// Ledger scores stay inside [-2, 1] and the incrementally maintained
/// numerator equals batch recomputation exactly, on random ledgers of up
/// to 10^3 entries.
#[test]
fn criterion_02_score_bounds_and_incremental_exactness() {
    let mut rng = rng(202);
    for case in 0..60u32 {
        let mut ledger = CredibilityLedger::new("blog");
        let products = rng.gen_range(1..=1000usize);
        let moves = products + rng.gen_range(0..products); // revisits revise entries
        let flag_choices = [(1u8, 0u8), (0, 1), (0, 0)];
        for m in 0..moves {
            let key = format!("p{:04}", rng.gen_range(0..products));
            let (t, f) = flag_choices[rng.gen_range(0..flag_choices.len())];
            let when = Utc.timestamp_opt(rng.gen_range(0..2_000_000_000i64), 0).unwrap();
            ledger
                .update(&assignment("blog", &key, t, f, Some(when), None))
                .expect("valid flags must be accepted");

            if m % 97 == 0 || m + 1 == moves {
                let score = ledger.score();
                let value = score.value();
                assert!(
                    (-2.0..=1.0).contains(&value),
                    "case {case}: score {value} escaped [-2, 1]"
                );
                // Exactness: zero tolerance, integer numerators must agree.
                assert_eq!(
                    score.sum,
                    ledger.batch_sum(),
                    "case {case}: incremental sum diverged from batch recomputation"
                );
                assert_eq!(score.n, ledger.len());
            }
        }
    }
    println!(
        "criterion 2: PASS — score ∈ [-2, 1] and incremental == batch numerator on random ledgers (n ≤ 10^3)"
    );
}

// ---------------------------------------------------------------- 3

fn records(annotator: &str, verdicts: &[u8]) -> Vec<AnnotationRecord> {
    verdicts
        .iter()
        .enumerate()
        .map(|(i, v)| AnnotationRecord {
            headline_id: format!("h{i:04}"),
            annotator: annotator.to_string(),
            verdict: *v,
        })
        .collect()
}

/// Chance-corrected agreement: the hand case pr_a=0.75, pr_e=0.5 gives
/// kappa=0.5 exactly; symmetry and kappa(x,x)=1 hold on 10^3 random pairs.
#[test]
fn criterion_03_kappa_hand_case_symmetry_self_agreement() {
    // Hand case: 6 of 8 match, both annotators say yes exactly 4 times,
    // so pr_e = 0.5*0.5 + 0.5*0.5 = 0.5 and kappa = (0.75-0.5)/(1-0.5).
    let a1 = records("a1", &[1, 1, 1, 1, 0, 0, 0, 0]);
    let a2 = records("a2", &[1, 1, 1, 0, 1, 0, 0, 0]);
    let report = kappa(&a1, &a2).unwrap();
    assert_eq!(report.pr_a, 0.75);
    assert_eq!(report.pr_e, 0.5);
    assert_eq!(report.kappa, 0.5, "hand-computed kappa must be exact");

    let mut rng = rng(303);
    for case in 0..1000u32 {
        let n = rng.gen_range(1..=40usize);
        let v1: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1u8)).collect();
        let v2: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1u8)).collect();
        let a = records("a", &v1);
        let b = records("b", &v2);

        // Symmetry: swapping annotators changes nothing, including the
        // decision to reject degenerate marginals.
        match (kappa(&a, &b), kappa(&b, &a)) {
            (Ok(ab), Ok(ba)) => {
                assert_eq!(ab.kappa, ba.kappa, "case {case}: kappa not symmetric");
                assert_eq!(ab.pr_e, ba.pr_e, "case {case}: pr_e not symmetric");
            }
            (Err(_), Err(_)) => {}
            (ab, ba) => panic!("case {case}: asymmetric outcome {ab:?} vs {ba:?}"),
        }

        // Perfect self-agreement scores 1 even when marginals degenerate.
        let self_report = kappa(&a, &records("b", &v1)).unwrap();
        assert_eq!(self_report.kappa, 1.0, "case {case}: kappa(x,x) != 1");
    }
    println!(
        "criterion 3: PASS — kappa hand case exact (0.5); symmetry and kappa(x,x)=1 on 10^3 random pairs"
    );
}

// ---------------------------------------------------------------- 4

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures/demo")
        .join(name)
}

fn run_demo_pipeline(out_dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_leakcred"))
        .arg("pipeline")
        .arg("--leaks")
        .arg(fixture("leaks.jsonl"))
        .arg("--prs")
        .arg(fixture("prs.jsonl"))
        .arg("--gazetteer")
        .arg(fixture("gazetteer.tsv"))
        .arg("--templates")
        .arg(fixture("templates.txt"))
        .arg("--fixtures")
        .arg(fixture("dates.tsv"))
        .arg("--out-dir")
        .arg(out_dir)
        .output()
        .expect("pipeline binary must spawn")
}

/// The demo fixtures replay three historical leak/announcement datetime
/// pairs; every product must come out t=1 and the blog strictly positive.
#[test]
fn criterion_04_demo_datetime_replay() {
    let dir = tempfile::tempdir().unwrap();
    let started = Instant::now();
    let output = run_demo_pipeline(dir.path());
    let elapsed = started.elapsed();
    assert!(
        output.status.success(),
        "pipeline failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(
        elapsed < Duration::from_secs(5),
        "pipeline took {elapsed:?}, budget is 5s"
    );

    // All three products strictly precede their announcements.
    let truth = std::fs::read_to_string(dir.path().join("truth.csv")).unwrap();
    let rows: Vec<&str> = truth.lines().skip(1).collect();
    assert_eq!(rows.len(), 3, "expected one row per demo product:\n{truth}");
    let expected = [
        ("galaxy s10", "2018-07-07T07:54:44Z", "2019-02-20T08:59:56Z"),
        ("galaxy s8", "2017-01-31T09:22:28Z", "2017-02-25T13:54:13Z"),
        ("galaxy s9", "2017-12-15T04:55:38Z", "2018-02-25T15:29:23Z"),
    ];
    for (row, (key, leak_time, pr_time)) in rows.iter().zip(expected) {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[1], key);
        assert_eq!(cols[2], "1", "t must be 1 for {key}: {row}");
        assert_eq!(cols[3], "0", "f must be 0 for {key}: {row}");
        assert_eq!(cols[4], leak_time, "leak instant drifted for {key}");
        assert_eq!(cols[5], pr_time, "announcement instant drifted for {key}");
    }

    // Score line: blog, n, numerator, value — strictly positive.
    let stdout = String::from_utf8(output.stdout).unwrap();
    let score_line = stdout
        .lines()
        .find(|l| l.starts_with("AP\t"))
        .unwrap_or_else(|| panic!("no AP score line in {stdout:?}"));
    let fields: Vec<&str> = score_line.split('\t').collect();
    assert_eq!(fields[1], "3");
    assert_eq!(fields[2], "3");
    let value: f64 = fields[3].parse().unwrap();
    assert!(value > 0.0, "demo blog must score strictly positive");

    println!(
        "criterion 4: PASS — demo replay gives t=1 on all 3 products, score {value} > 0, in {elapsed:?}"
    );
}

// ---------------------------------------------------------------- 5

/// Twenty headline templates with a name slot, disjoint wording, at least
/// two context tokens on each side of the slot.
fn synthetic_templates() -> Vec<Template> {
    [
        "insider claims XXX arrives within weeks",
        "leaked render shows XXX before launch",
        "supply chain hints XXX enters production",
        "retail listing reveals XXX pricing tiers",
        "benchmark entry exposes XXX chip details",
        "patent filing sketches XXX hinge design",
        "carrier database lists XXX model numbers",
        "trade show badge teases XXX debut slot",
        "firmware strings mention XXX camera modes",
        "packaging photos confirm XXX color options",
        "certification paperwork clears XXX radio bands",
        "spy shots capture XXX prototype casing",
        "promo poster leaks XXX headline feature",
        "store inventory logs XXX stocking dates",
        "beta build references XXX display profile",
        "shipping manifest records XXX unit volumes",
        "billboard teaser previews XXX slogan text",
        "support page drafts XXX manual sections",
        "review embargo memo names XXX press window",
        "accessory maker molds XXX case cutouts",
    ]
    .iter()
    .map(|t| Template::new(t, None).unwrap())
    .collect()
}

/// Fifty two-token product names; the digit keeps the pattern fallback's
/// content check satisfiable in lowercase text.
fn synthetic_names() -> Vec<String> {
    (0..50).map(|i| format!("vertax q{i:02}")).collect()
}

fn gazetteer_of(names: &[String]) -> Gazetteer {
    let mut g = Gazetteer::new();
    for (i, name) in names.iter().enumerate() {
        let label = if i % 2 == 0 { "Acme_sp" } else { "Orbit_sp" };
        g.insert(name, label).unwrap();
    }
    g
}

fn headline_of(example: &TrainingExample, idx: usize) -> Headline {
    let url = format!("https://blog.test/{idx}");
    Headline {
        id: headline_id("blog", &url),
        source: "blog".to_string(),
        kind: HeadlineKind::Leak,
        url,
        text: example.text.clone(),
        declared_time: None,
        estimated_time: None,
    }
}

/// On 20 templates x 50 gazetteer names the dictionary pass finds every
/// gold span and nothing else.
#[test]
fn criterion_05_gazetteer_pass_exact_on_synthetic_corpus() {
    let templates = synthetic_templates();
    let names = synthetic_names();
    let gazetteer = gazetteer_of(&names);
    let examples = expand_templates(&templates, &gazetteer).unwrap();
    assert_eq!(examples.len(), 20 * 50);

    let recognizer = Recognizer::new(&gazetteer, &learn_patterns(&[]), StopwordSet::builtin_custom());
    let mut gold = 0usize;
    let mut predicted = 0usize;
    let mut matched = 0usize;
    for (idx, example) in examples.iter().enumerate() {
        let headline = headline_of(example, idx);
        let spans = recognizer.recognize(&headline);
        gold += 1;
        predicted += spans.len();
        matched += spans
            .iter()
            .filter(|s| {
                s.origin == SpanOrigin::Gazetteer
                    && s.start == example.start
                    && s.end == example.end
                    && s.surface == example.name
                    && s.label == example.label
            })
            .count();
    }
    let recall = matched as f64 / gold as f64;
    let precision = matched as f64 / predicted as f64;
    assert_eq!(recall, 1.0, "gazetteer pass missed gold spans");
    assert_eq!(precision, 1.0, "gazetteer pass produced spurious spans");
    println!(
        "criterion 5: PASS — gazetteer pass recall=1.0 precision=1.0 on 20 templates x 50 names"
    );
}

// ---------------------------------------------------------------- 6

/// Names never seen in training are still recognized from their learned
/// contexts: recall >= 0.80 over 10^4 headlines in under 30 s.
#[test]
fn criterion_06_pattern_fallback_recalls_held_out_names() {
    let templates = synthetic_templates();
    let names = synthetic_names();
    let (train_names, held_out) = names.split_at(names.len() / 2);

    let train_gazetteer = gazetteer_of(train_names);
    let patterns = learn_patterns(&expand_templates(&templates, &train_gazetteer).unwrap());
    assert!(!patterns.is_empty());

    // Gold spans for held-out names come from the same expansion rule, but
    // the recognizer's gazetteer knows only the training half.
    let unseen = expand_templates(&templates, &gazetteer_of(held_out)).unwrap();
    let recognizer = Recognizer::new(&train_gazetteer, &patterns, StopwordSet::builtin_custom());

    let total = 10_000usize;
    let started = Instant::now();
    let mut hits = 0usize;
    for idx in 0..total {
        let example = &unseen[idx % unseen.len()];
        let headline = headline_of(example, idx);
        let found = recognizer.recognize(&headline).iter().any(|s| {
            s.origin == SpanOrigin::Pattern && s.start == example.start && s.end == example.end
        });
        hits += usize::from(found);
    }
    let elapsed = started.elapsed();
    let recall = hits as f64 / total as f64;
    assert!(
        recall >= 0.80,
        "held-out recall {recall} below the 0.80 floor"
    );
    assert!(
        elapsed < Duration::from_secs(30),
        "10^4 headlines took {elapsed:?}, budget is 30s"
    );
    println!(
        "criterion 6: PASS — held-out name recall {recall:.4} >= 0.80 over 10^4 headlines in {elapsed:?}"
    );
}

// ---------------------------------------------------------------- 7

/// Token-set overlap has the textbook value on the running example and the
/// percentile threshold matches an integer-rank oracle on 10^3 lists.
#[test]
fn criterion_07_jaccard_exact_and_percentile_oracle() {
    // |{galaxy, s10} ∩ {galaxy, s10, 5g}| / |union| = 2/3.
    assert_eq!(jaccard("galaxy s10", "galaxy s10 5g"), 2.0 / 3.0);
    assert_eq!(jaccard("galaxy s10 5g", "galaxy s10"), 2.0 / 3.0);

    let mut rng = rng(707);
    for case in 0..1000u32 {
        let n = rng.gen_range(1..=200usize);
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        // Percentiles in thousandths keep p*n/100 away from integers, so
        // the integer-arithmetic oracle rank below is exact.
        let p_milli: u64 = rng.gen_range(0..=99u64) * 1000 + 137;
        let p = p_milli as f64 / 1000.0;

        // Oracle: smallest k with k*100000 >= p_milli*n, then k-th smallest.
        let k = (p_milli * n as u64).div_ceil(100_000).max(1) as usize;
        let mut sorted = scores.clone();
        sorted.sort_by(f64::total_cmp);
        let expected = sorted[k - 1];

        let got = percentile_threshold(&scores, p).unwrap();
        assert_eq!(got, expected, "case {case}: p={p} n={n}");
    }
    assert!(percentile_threshold(&[], 50.0).is_err());
    assert!(percentile_threshold(&[1.0], 0.0).is_err());
    assert!(percentile_threshold(&[1.0], 100.0).is_err());
    println!(
        "criterion 7: PASS — jaccard(galaxy s10, galaxy s10 5g) = 2/3 exact; percentile matches rank oracle on 10^3 lists"
    );
}

// ---------------------------------------------------------------- 8

fn push_headline(corpus: &mut Corpus, source: &str, kind: HeadlineKind, idx: usize, text: &str) {
    let url = format!("https://{source}.test/{idx}");
    corpus
        .push(Headline {
            id: headline_id(source, &url),
            source: source.to_string(),
            kind,
            url,
            text: text.to_string(),
            declared_time: None,
            estimated_time: None,
        })
        .unwrap();
}

/// Length statistics agree with a naive recomputation to 1e-9 relative;
/// upbeat announcement wording scores a strictly higher sentiment mean
/// than flat leak wording.
#[test]
fn criterion_08_analytics_oracle_and_sentiment_direction() {
    let mut rng = rng(808);
    let words = ["device", "screen", "launch", "video", "report", "update"];
    for case in 0..200u32 {
        let mut corpus = Corpus::new();
        let n = rng.gen_range(1..=60usize);
        for idx in 0..n {
            let len = rng.gen_range(1..=18usize);
            let text: Vec<&str> = (0..len).map(|_| words[rng.gen_range(0..words.len())]).collect();
            push_headline(&mut corpus, "src", HeadlineKind::Leak, idx, &text.join(" "));
        }

        let stats = length_stats(&corpus, HeadlineKind::Leak).unwrap();

        // Naive oracle over the same tokenization.
        let mut lengths: Vec<f64> = corpus
            .of_kind(HeadlineKind::Leak)
            .map(|h| tokenize(&normalize(&h.text)).len() as f64)
            .collect();
        lengths.sort_by(f64::total_cmp);
        let mean = lengths.iter().sum::<f64>() / lengths.len() as f64;
        let median = if lengths.len() % 2 == 1 {
            lengths[lengths.len() / 2]
        } else {
            (lengths[lengths.len() / 2 - 1] + lengths[lengths.len() / 2]) / 2.0
        };
        let variance =
            lengths.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / lengths.len() as f64;
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
        assert!(rel(stats.mean, mean) < 1e-9, "case {case}: mean diverged");
        assert!(rel(stats.median, median) < 1e-9, "case {case}: median diverged");
        assert!(
            rel(stats.std_dev, variance.sqrt()) < 1e-9,
            "case {case}: std_dev diverged"
        );
        assert_eq!(stats.n, lengths.len());
    }

    // Direction test: official announcements read celebratory, leaks flat.
    let lexicon = ValenceLexicon::builtin();
    let mut corpus = Corpus::new();
    for (idx, text) in [
        "new phone appears in carrier database listing",
        "tablet model number surfaces in regulatory filing",
        "smartwatch casing shown in factory photos",
    ]
    .iter()
    .enumerate()
    {
        push_headline(&mut corpus, "blog", HeadlineKind::Leak, idx, text);
    }
    for (idx, text) in [
        "company unveils stunning new phone with brilliant display",
        "company announces remarkable tablet with seamless design",
        "company introduces beautiful smartwatch with impressive battery",
    ]
    .iter()
    .enumerate()
    {
        push_headline(&mut corpus, "newsroom", HeadlineKind::PressRelease, idx, text);
    }
    let leak_mean = sentiment_mean_of_kind(&corpus, &lexicon, HeadlineKind::Leak).unwrap();
    let pr_mean = sentiment_mean_of_kind(&corpus, &lexicon, HeadlineKind::PressRelease).unwrap();
    assert!(
        pr_mean > leak_mean,
        "announcement mean {pr_mean} must exceed leak mean {leak_mean}"
    );
    println!(
        "criterion 8: PASS — length stats match naive oracle (<1e-9 rel); announcement sentiment {pr_mean:.3} > leak {leak_mean:.3}"
    );
}

// ---------------------------------------------------------------- 9

fn collect_files(root: &Path, prefix: &Path, out: &mut BTreeSet<PathBuf>) {
    for entry in std::fs::read_dir(root).unwrap() {
        let entry = entry.unwrap();
        let rel = prefix.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            collect_files(&entry.path(), &rel, out);
        } else {
            out.insert(rel);
        }
    }
}

/// Two full pipeline runs on identical inputs leave byte-identical
/// artifact trees.
#[test]
fn criterion_09_pipeline_runs_are_byte_identical() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [dir_a.path(), dir_b.path()] {
        let output = run_demo_pipeline(dir);
        assert!(
            output.status.success(),
            "pipeline failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    }

    let mut files_a = BTreeSet::new();
    let mut files_b = BTreeSet::new();
    collect_files(dir_a.path(), Path::new(""), &mut files_a);
    collect_files(dir_b.path(), Path::new(""), &mut files_b);
    assert_eq!(files_a, files_b, "artifact trees list different files");
    assert!(!files_a.is_empty(), "pipeline produced no artifacts");

    for rel in &files_a {
        let bytes_a = std::fs::read(dir_a.path().join(rel)).unwrap();
        let bytes_b = std::fs::read(dir_b.path().join(rel)).unwrap();
        assert_eq!(bytes_a, bytes_b, "{} differs between runs", rel.display());
    }
    println!(
        "criterion 9: PASS — {} artifacts byte-identical across two pipeline runs",
        files_a.len()
    );
}

// ---------------------------------------------------------------- 10

/// Persisted ledgers reload exactly — entries, audit trail, and score —
/// over 10^3 random ledgers; corrupted files are rejected, never
/// silently repaired.
#[test]
fn criterion_10_ledger_round_trip_and_corruption_rejection() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ledger.json");
    let mut rng = rng(1010);

    for case in 0..1000u32 {
        let blog = format!("blog-{}", rng.gen_range(0..30u8));
        let mut ledger = CredibilityLedger::new(&blog);
        let flag_choices = [(1u8, 0u8), (0, 1), (0, 0)];
        for m in 0..rng.gen_range(1..=12usize) {
            let key = format!("prod-{}", rng.gen_range(0..8u8));
            let (t, f) = flag_choices[rng.gen_range(0..flag_choices.len())];
            let leak = Utc.timestamp_opt(rng.gen_range(0..2_000_000_000i64), 0).unwrap();
            let pr = Utc.timestamp_opt(rng.gen_range(0..2_000_000_000i64), 0).unwrap();
            ledger
                .update(&assignment(&blog, &key, t, f, Some(leak), Some(pr)))
                .unwrap_or_else(|e| panic!("case {case} move {m}: {e}"));
        }

        ledger.persist(&path).unwrap();
        let reloaded = CredibilityLedger::load(&path).unwrap();
        assert_eq!(reloaded.blog(), ledger.blog(), "case {case}: blog drifted");
        assert_eq!(
            reloaded.entries(),
            ledger.entries(),
            "case {case}: entries drifted"
        );
        assert_eq!(reloaded.audit(), ledger.audit(), "case {case}: audit drifted");
        assert_eq!(
            reloaded.score(),
            ledger.score(),
            "case {case}: score drifted"
        );
    }

    // Fails closed on corruption: truncation, garbling, and flag tampering
    // must all be load errors.
    let mut ledger = CredibilityLedger::new("victim");
    ledger
        .update(&assignment(
            "victim",
            "prod",
            1,
            0,
            Some(utc("2018-07-07T07:54:44Z")),
            Some(utc("2019-02-20T08:59:56Z")),
        ))
        .unwrap();
    ledger.persist(&path).unwrap();
    let good = std::fs::read_to_string(&path).unwrap();

    std::fs::write(&path, "").unwrap();
    assert!(CredibilityLedger::load(&path).is_err(), "empty file accepted");

    std::fs::write(&path, &good[..good.len() / 2]).unwrap();
    assert!(
        CredibilityLedger::load(&path).is_err(),
        "truncated file accepted"
    );

    std::fs::write(&path, good.replace("\"t\": 1", "\"t\": 9")).unwrap();
    assert!(
        CredibilityLedger::load(&path).is_err(),
        "out-of-domain flag accepted"
    );

    std::fs::write(&path, good.replace("\"t\": 1", "\"t\": 0")).unwrap();
    assert!(
        CredibilityLedger::load(&path).is_err(),
        "entry/audit mismatch accepted"
    );

    println!(
        "criterion 10: PASS — 10^3 ledgers round-trip exactly; corrupt files fail closed"
    );
}
