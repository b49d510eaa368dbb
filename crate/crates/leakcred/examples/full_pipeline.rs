//! The whole flow as library calls: ingest → train → extract → bin →
//! date → truth → credibility score, mirroring what the `leakcred`
//! binary's `pipeline` subcommand does with files.
//!
//! ```not_rust
//! cargo run -q --example full_pipeline
//! ```

use std::path::Path;
use std::time::Duration;

use leakcred::chronology::{date_corpus, EstimatorKind, EstimatorRegistry, TimeTable};
use leakcred::corpus::{ingest, CorpusFormat, HeadlineKind, StopwordSet};
use leakcred::credibility::CredibilityLedger;
use leakcred::entity::{expand_templates, learn_patterns, Gazetteer, Recognizer, Template};
use leakcred::matching::{assign_truth, bin, TruthDecision};
use leakcred::similarity::Metric;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/demo");

    // Ingest both kinds into one corpus.
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
    println!("ingested {} headlines", corpus.len());

    // Recognizer assets.
    let templates = Template::load(&dir.join("templates.txt")).expect("parses");
    let gazetteer = Gazetteer::load(&dir.join("gazetteer.tsv")).expect("parses");
    let patterns = learn_patterns(&expand_templates(&templates, &gazetteer).expect("expand"));
    let stopwords = StopwordSet::builtin_custom();
    let recognizer = Recognizer::new(&gazetteer, &patterns, stopwords.clone());
    let spans: Vec<_> = corpus
        .headlines()
        .iter()
        .flat_map(|h| recognizer.recognize(h))
        .collect();
    println!("recognized {} spans", spans.len());

    // Carbon-date the URLs from the bundled first-seen table.
    let mut registry = EstimatorRegistry::new();
    registry
        .push(
            "fixtures",
            EstimatorKind::FixtureFile(TimeTable::load(&dir.join("dates.tsv")).expect("parses")),
        )
        .expect("fresh id");
    let dated = date_corpus(&corpus, &registry, Duration::from_secs(5));
    println!(
        "dated {} of {} urls",
        dated.corpus.len() - dated.undatable.len(),
        dated.corpus.len()
    );
    let corpus = dated.corpus;

    // Bin by product and judge each bin per leak blog.
    let bins = bin(&corpus, &spans, Metric::Jaccard, None, 0.5, &stopwords)
        .expect("threshold in range")
        .bins;
    println!("{} product bins", bins.len());

    for blog in corpus.sources_of_kind(HeadlineKind::Leak) {
        let mut ledger = CredibilityLedger::new(&blog);
        for b in &bins {
            if let TruthDecision::Assigned(a) = assign_truth(b, &blog, false) {
                ledger.update(&a).expect("valid assignment");
            }
        }
        let score = ledger.score();
        println!(
            "\n{blog}: n={} sum={} credibility score={}",
            score.n,
            score.sum,
            score.value()
        );
        for (key, entry) in ledger.entries() {
            println!("  {key}: t={} f={}", entry.t, entry.f);
        }
    }
}
