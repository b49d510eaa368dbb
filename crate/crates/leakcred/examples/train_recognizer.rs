//! Build recognizer assets: expand slot templates against a gazetteer and
//! learn the context patterns around the name slot.
//!
//! ```not_rust
//! cargo run -q --example train_recognizer
//! ```
//!
//! Each template contains exactly one `XXX` slot. Substituting every
//! gazetteer name (restricted by the template's company hint, when given)
//! yields a synthetic training corpus with exact gold offsets; the ≤2
//! tokens on each side of the slot become weighted context patterns.

use std::path::Path;

use leakcred::entity::{expand_templates, learn_patterns, Gazetteer, Template};

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/demo");
    let templates = Template::load(&dir.join("templates.txt")).expect("templates parse");
    let gazetteer = Gazetteer::load(&dir.join("gazetteer.tsv")).expect("gazetteer parses");

    let examples = expand_templates(&templates, &gazetteer).expect("templates are well-formed");
    println!(
        "{} templates x {} names -> {} training headlines",
        templates.len(),
        gazetteer.len(),
        examples.len()
    );
    for example in examples.iter().take(3) {
        println!(
            "  {:60} gold=({}, {}, {})",
            format!("{:?}", example.text),
            example.start,
            example.end,
            example.label
        );
    }

    let patterns = learn_patterns(&examples);
    println!("\n{} context patterns:", patterns.len());
    for pattern in &patterns.patterns {
        println!(
            "  left={:?} right={:?} weight={} label={}",
            pattern.left,
            pattern.right,
            pattern.weight,
            pattern.majority_label().unwrap_or("-")
        );
    }
}
