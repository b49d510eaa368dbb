//! Evaluate predicted names against human annotation: per-headline
//! similarity, accuracy over agreed headlines, Cohen's kappa between the
//! annotators, and the percentile rule for picking the threshold.
//!
//! ```not_rust
//! cargo run -q --example annotator_agreement
//! ```

use std::path::Path;

use leakcred::corpus::StopwordSet;
use leakcred::entity::{
    evaluate, kappa, percentile_threshold, AnnotationRecord, EvalItem,
};
use leakcred::similarity::Metric;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/demo");
    let a1 = AnnotationRecord::load(&dir.join("annotations_a.csv")).expect("parses");
    let a2 = AnnotationRecord::load(&dir.join("annotations_b.csv")).expect("parses");

    let report = kappa(&a1, &a2).expect("same headline ids");
    println!(
        "kappa: pr_a={} pr_e={} kappa={:.4} over {} headlines",
        report.pr_a, report.pr_e, report.kappa, report.n
    );

    // Predicted vs annotated product names for three headlines; the
    // prediction counts as correct at similarity >= threshold, and accuracy
    // is taken over headlines whose annotators agree.
    let items = vec![
        EvalItem {
            headline_id: "h001".to_string(),
            predicted: "galaxy s10".to_string(),
            annotated: "galaxy s10 5g".to_string(),
        },
        EvalItem {
            headline_id: "h002".to_string(),
            predicted: "iphone xr".to_string(),
            annotated: "iphone xr".to_string(),
        },
        EvalItem {
            headline_id: "h003".to_string(),
            predicted: "pixel".to_string(),
            annotated: "galaxy note 9".to_string(),
        },
    ];
    let annotations: Vec<AnnotationRecord> = a1
        .iter()
        .chain(a2.iter())
        .filter(|a| items.iter().any(|i| i.headline_id == a.headline_id))
        .cloned()
        .collect();
    let eval = evaluate(
        &items,
        &annotations,
        Metric::Jaccard,
        None,
        0.5,
        &StopwordSet::builtin_custom(),
    )
    .expect("annotated");
    println!(
        "\nevaluation: accuracy={:.4} over {} agreed of {} headlines (threshold {})",
        eval.accuracy, eval.agreed, eval.total, eval.threshold
    );
    for (id, h) in &eval.per_headline {
        println!(
            "  {id}: similarity={:.4} correct={} agreed={}",
            h.similarity, h.correct, h.agreed
        );
    }

    // The working threshold can be derived from the observed score
    // distribution instead of being fixed.
    let scores: Vec<f64> = eval.per_headline.values().map(|h| h.similarity).collect();
    let t = percentile_threshold(&scores, 25.0).expect("non-empty");
    println!("\n25th-percentile threshold of observed similarities: {t}");
}
