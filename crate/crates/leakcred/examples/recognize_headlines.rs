//! Recognize product names: gazetteer pass first, learned context
//! patterns as the fallback for names never seen before.
//!
//! ```not_rust
//! cargo run -q --example recognize_headlines
//! ```
//!
//! "galaxy z99" is in no gazetteer — the second headline below is matched
//! purely by the context learned from the demo templates, which is how
//! evolving product names stay recognizable without retraining.

use std::path::Path;

use leakcred::corpus::{headline_id, Headline, HeadlineKind, StopwordSet};
use leakcred::entity::{expand_templates, learn_patterns, Gazetteer, Recognizer, Template};

fn headline(text: &str) -> Headline {
    let url = format!("https://demo.example/{}", text.len());
    Headline {
        id: headline_id("demo", &url),
        source: "demo".to_string(),
        kind: HeadlineKind::Leak,
        url,
        text: text.to_string(),
        declared_time: None,
        estimated_time: None,
    }
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/demo");
    let templates = Template::load(&dir.join("templates.txt")).expect("templates parse");
    let gazetteer = Gazetteer::load(&dir.join("gazetteer.tsv")).expect("gazetteer parses");
    let patterns = learn_patterns(&expand_templates(&templates, &gazetteer).expect("expand"));
    let recognizer = Recognizer::new(&gazetteer, &patterns, StopwordSet::builtin_custom());

    let headlines = [
        headline("The 5G version of the Galaxy S10 will launch next month"),
        headline("Galaxy Z99 leaked with slim bezels"),
        headline("Quarterly earnings call scheduled for Thursday"),
    ];
    for h in &headlines {
        let spans = recognizer.recognize(h);
        println!("{:?}", h.text);
        if spans.is_empty() {
            println!("  (no product found)");
        }
        for span in spans {
            println!(
                "  ({}, {}, {:?}) label={} origin={:?}",
                span.start, span.end, span.surface, span.label, span.origin
            );
        }
    }
}
