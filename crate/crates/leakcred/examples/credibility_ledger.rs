//! The per-blog credibility ledger: score updates, revisions, the audit
//! trail, and locked persistence.
//!
//! ```not_rust
//! cargo run -q --example credibility_ledger
//! ```
//!
//! The score is (1/n)·Σ(t − 2f) over the blog's products, kept as an
//! exact integer numerator so incremental updates and batch recomputation
//! agree bit for bit. Positive means authentic leak provider; negative
//! means rumor-prone.

use chrono::{DateTime, Utc};

use leakcred::credibility::{CredibilityLedger, LedgerLock};
use leakcred::matching::TruthAssignment;

fn utc(s: &str) -> DateTime<Utc> {
    DateTime::parse_from_rfc3339(s).unwrap().with_timezone(&Utc)
}

fn claim(key: &str, t: u8, f: u8, pr: &str) -> TruthAssignment {
    TruthAssignment {
        blog: "AP".to_string(),
        product_key: key.to_string(),
        t,
        f,
        first_leak_time: Some(utc("2018-07-07T07:54:44Z")),
        first_pr_time: Some(utc(pr)),
    }
}

fn main() {
    let mut ledger = CredibilityLedger::new("AP");
    println!(
        "fresh ledger: score={} unscored={}",
        ledger.score().value(),
        ledger.score().is_unscored()
    );

    // A verified leak, a falsified one, and a later press-release that
    // revises the falsified claim to verified.
    let moves = [
        claim("galaxy s10", 1, 0, "2019-02-20T08:59:56Z"),
        claim("galaxy s9", 0, 1, "2018-02-25T15:29:23Z"),
        claim("galaxy s9", 1, 0, "2018-02-25T15:29:23Z"),
    ];
    for assignment in &moves {
        match ledger.update(assignment).expect("valid flags") {
            Some(event) => println!(
                "  {:10} {:?} -> score {} (cause {:?})",
                event.product_key, (assignment.t, assignment.f), event.new_score, event.cause
            ),
            None => println!("  {:10} replay ignored", assignment.product_key),
        }
    }
    // Replaying the last assignment changes nothing and logs nothing.
    assert!(ledger.update(&moves[2]).expect("valid").is_none());

    let score = ledger.score();
    println!(
        "final: n={} sum={} score={} ({} audit events)",
        score.n,
        score.sum,
        score.value(),
        ledger.audit().len()
    );
    assert_eq!(ledger.score().sum, ledger.batch_sum());

    // Persistence is guarded by an advisory lock on <ledger>.lock; a
    // second writer gets a busy error instead of silently interleaving.
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("AP.json");
    let lock = LedgerLock::acquire(&path).expect("first writer");
    ledger.persist_with(&path, &lock).expect("writable");
    match LedgerLock::acquire(&path) {
        Err(e) => println!("second writer refused: {e}"),
        Ok(_) => unreachable!("lock is held"),
    }
    drop(lock);

    let loaded = CredibilityLedger::load(&path).expect("round-trips");
    assert_eq!(loaded, ledger);
    println!("persisted and reloaded: score={}", loaded.score().value());
}
