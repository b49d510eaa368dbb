//! Read headline files into a validated corpus.
//!
//! ```not_rust
//! cargo run -q --example ingest_corpus
//! ```
//!
//! Duplicate (source, url) pairs are dropped with a count, malformed lines
//! are reported with their line numbers, and every text is NFC-normalized
//! with whitespace collapsed before it is stored.

use std::path::Path;

use leakcred::corpus::{ingest, ingest_reader, CorpusFormat, HeadlineKind};

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/demo");

    let mut outcome = ingest(&dir.join("leaks.jsonl"), CorpusFormat::Jsonl, None)
        .expect("demo leak file is readable");
    let prs = ingest(&dir.join("prs.jsonl"), CorpusFormat::Jsonl, None)
        .expect("demo press-release file is readable");
    outcome
        .corpus
        .merge(prs.corpus)
        .expect("no source appears under both kinds");

    println!("corpus: {} headlines", outcome.corpus.len());
    for headline in outcome.corpus.headlines() {
        println!(
            "  [{}] {:14} {:>13}  {}",
            headline.id, headline.source, headline.kind, headline.text
        );
    }

    // A dirty batch: one duplicate, one blank text, one unknown kind.
    let dirty = concat!(
        r#"{"source": "GSM", "kind": "leak", "url": "https://gsm.example/a", "text": "pixel 3 battery specs leak", "declared_time": null}"#,
        "\n",
        r#"{"source": "GSM", "kind": "leak", "url": "https://gsm.example/a", "text": "pixel 3 battery specs leak", "declared_time": null}"#,
        "\n",
        r#"{"source": "GSM", "kind": "leak", "url": "https://gsm.example/b", "text": "   ", "declared_time": null}"#,
        "\n",
        r#"{"source": "GSM", "kind": "rumor", "url": "https://gsm.example/c", "text": "iphone xs sighting", "declared_time": null}"#,
        "\n",
    );
    let messy = ingest_reader(dirty.as_bytes(), CorpusFormat::Jsonl, Some(HeadlineKind::Leak))
        .expect("under half of the lines are bad");
    println!(
        "\ndirty batch: kept {}, dropped {} duplicate(s), rejected {} line(s)",
        messy.corpus.len(),
        messy.duplicate_count,
        messy.rejects.len()
    );
    for reject in &messy.rejects {
        println!("  line {}: {}", reject.line, reject.reason);
    }
}
