//! Estimate when a URL first appeared by polling several estimators
//! concurrently and keeping the earliest answer.
//!
//! ```not_rust
//! cargo run -q --example date_urls
//! ```
//!
//! Estimators here are a known-time fixture table and a local archive
//! endpoint served from this process; HTTP HEAD Last-Modified works the
//! same way against real servers. The aggregate is the minimum over all
//! estimates — the first appearance is what counts for a leak.

use std::io::{Read, Write};
use std::net::TcpListener;
use std::path::Path;
use std::time::Duration;

use leakcred::chronology::{aggregate, estimate, EstimatorKind, EstimatorRegistry, TimeTable};

/// Serve one canned archive response per connection, then stop.
fn serve_archive(responses: Vec<String>) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind");
    let addr = listener.local_addr().expect("addr");
    std::thread::spawn(move || {
        for body in responses {
            let Ok((mut stream, _)) = listener.accept() else { return };
            let mut buf = [0u8; 4096];
            let _ = stream.read(&mut buf);
            let _ = write!(
                stream,
                "HTTP/1.1 200 OK\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{}",
                body.len(),
                body
            );
        }
    });
    format!("http://{addr}/snapshots?url={{url}}")
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/demo");
    let archive_url = serve_archive(vec![
        r#"{"snapshots": [{"timestamp": "20180930120000"}, {"timestamp": "2019-01-05T00:00:00Z"}]}"#
            .to_string(),
    ]);

    let mut registry = EstimatorRegistry::new();
    registry
        .push(
            "fixtures",
            EstimatorKind::FixtureFile(TimeTable::load(&dir.join("dates.tsv")).expect("parses")),
        )
        .expect("fresh id");
    registry
        .push(
            "archive",
            EstimatorKind::ArchiveLookup {
                query_template: archive_url,
            },
        )
        .expect("fresh id");

    let url = "https://ap.example/galaxy-s10-first-look";
    let outcome = estimate(url, &registry, Duration::from_secs(5));
    println!("estimates for {url}:");
    for e in &outcome.estimates {
        println!(
            "  {:10} {} ({:?})",
            e.estimator_id,
            e.time.to_rfc3339(),
            e.confidence
        );
    }
    for f in &outcome.failures {
        println!("  {:10} failed: {}", f.estimator_id, f.reason);
    }

    let min = aggregate(&outcome.estimates).expect("at least one estimate");
    println!(
        "\nfirst appearance: {} (from {})",
        min.time.to_rfc3339(),
        min.estimator_id
    );
}
