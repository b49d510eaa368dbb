//! Score tech-blog credibility from product-leak headlines.
//!
//! The flow: ingest headline files into one validated corpus, recognize
//! product names (gazetteer first, learned context patterns as fallback),
//! bin leak and press-release headlines per product, estimate when each
//! URL first appeared, judge every leak claim against the product's first
//! press release, and fold the verdicts into per-blog credibility ledgers.
//!
//! Each stage is a module here and a subcommand of the `leakcred` binary;
//! `examples/` runs every stage in isolation against `fixtures/demo`.

pub mod analytics;
pub mod chronology;
pub mod cli;
pub mod corpus;
pub mod credibility;
pub mod entity;
pub mod matching;
pub mod similarity;
