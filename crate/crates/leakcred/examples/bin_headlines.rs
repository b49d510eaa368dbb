//! Group recognized headlines into per-product bins by surface
//! similarity, then judge each bin's leak claim against the
//! press-release time.
//!
//! ```not_rust
//! cargo run -q --example bin_headlines
//! ```
//!
//! Surfaces like "galaxy s10" and "galaxy s10 5g" merge into one bin
//! (Jaccard 2/3 ≥ 0.5) under single-linkage; the bin key is the
//! lexicographically smallest member, so results never depend on input
//! order.

use std::path::Path;
use std::time::Duration;

use leakcred::chronology::{date_corpus, EstimatorKind, EstimatorRegistry, TimeTable};
use leakcred::corpus::{ingest, CorpusFormat, StopwordSet};
use leakcred::entity::{Gazetteer, PatternSet, Recognizer};
use leakcred::matching::{assign_truth, bin, TruthDecision};
use leakcred::similarity::{jaccard, Metric};

fn main() {
    println!(
        "jaccard(\"galaxy s10\", \"galaxy s10 5g\") = {:.4}",
        jaccard("galaxy s10", "galaxy s10 5g")
    );
    println!(
        "jaccard(\"galaxy s10\", \"iphone xr\")     = {:.4}\n",
        jaccard("galaxy s10", "iphone xr")
    );

    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/demo");
    let mut corpus = ingest(&dir.join("leaks.jsonl"), CorpusFormat::Jsonl, None)
        .expect("readable")
        .corpus;
    corpus
        .merge(
            ingest(&dir.join("prs.jsonl"), CorpusFormat::Jsonl, None)
                .expect("readable")
                .corpus,
        )
        .expect("kinds are consistent");

    // The demo leaks carry no declared time; fill estimated times from the
    // bundled first-seen table so truth assignment has both sides.
    let mut registry = EstimatorRegistry::new();
    registry
        .push(
            "fixtures",
            EstimatorKind::FixtureFile(TimeTable::load(&dir.join("dates.tsv")).expect("parses")),
        )
        .expect("fresh id");
    let corpus = date_corpus(&corpus, &registry, Duration::from_secs(5)).corpus;

    let gazetteer = Gazetteer::load(&dir.join("gazetteer.tsv")).expect("gazetteer parses");
    let stopwords = StopwordSet::builtin_custom();
    let recognizer = Recognizer::new(&gazetteer, &PatternSet::default(), stopwords.clone());
    let spans: Vec<_> = corpus
        .headlines()
        .iter()
        .flat_map(|h| recognizer.recognize(h))
        .collect();

    let outcome = bin(&corpus, &spans, Metric::Jaccard, None, 0.5, &stopwords)
        .expect("threshold in range");
    println!("{} bins ({} unbinned):", outcome.bins.len(), outcome.unbinned.len());
    for b in &outcome.bins {
        println!(
            "  {:12} [{}] {} leak / {} press-release headline(s)",
            b.product_key,
            b.label,
            b.leak_headlines.len(),
            b.pr_headlines.len()
        );
        match assign_truth(b, "AP", false) {
            TruthDecision::Assigned(a) => println!(
                "    AP: t={} f={} (leak {:?} vs press-release {:?})",
                a.t,
                a.f,
                a.first_leak_time.map(|t| t.to_rfc3339()),
                a.first_pr_time.map(|t| t.to_rfc3339()),
            ),
            other => println!("    AP: {other:?}"),
        }
    }
}
