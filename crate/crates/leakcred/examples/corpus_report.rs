//! Corpus analytics: headline lengths, sentiment, and verb-form usage.
//!
//! ```not_rust
//! cargo run -q --example corpus_report
//! ```
//!
//! Press-release headlines read more positively than leak headlines and
//! favor present-tense verbs; leak headlines lean on participles and
//! modals. The numbers below come from the bundled demo corpus.

use std::path::Path;

use leakcred::analytics::{
    length_stats, sentiment_mean, sentiment_mean_of_kind, verb_profile_of_kind, ValenceLexicon,
    VerbTagger,
};
use leakcred::corpus::{ingest, CorpusFormat, HeadlineKind};

fn main() {
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

    for kind in [HeadlineKind::Leak, HeadlineKind::PressRelease] {
        let stats = length_stats(&corpus, kind).expect("both kinds present");
        println!(
            "{kind}: n={} mean={:.2} median={} std_dev={:.2} (words)",
            stats.n, stats.mean, stats.median, stats.std_dev
        );
    }

    let lexicon = ValenceLexicon::builtin();
    let report = sentiment_mean(&corpus, &lexicon);
    println!("\nmean compound sentiment per source ({}):", report.lexicon_id);
    for (source, mean) in &report.per_source_mean {
        println!("  {source}: {mean:.4}");
    }
    for kind in [HeadlineKind::Leak, HeadlineKind::PressRelease] {
        let mean = sentiment_mean_of_kind(&corpus, &lexicon, kind).expect("non-empty");
        println!("  all {kind}: {mean:.4}");
    }

    let tagger = VerbTagger::default();
    println!("\nverb-form usage per kind:");
    for kind in [HeadlineKind::Leak, HeadlineKind::PressRelease] {
        let profile = verb_profile_of_kind(&corpus, &tagger, kind);
        print!("  {kind}:");
        for (tag, count) in &profile.counts {
            print!(" {tag}={count}");
        }
        println!();
    }
}
