//! Per-product binning of leak and press-release headlines, and truth
//! assignment by datetime precedence.

use std::collections::BTreeMap;
use std::io::Write;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::{process_product_name, Corpus, Headline, HeadlineKind, StopwordSet};
use crate::entity::EntitySpan;
use crate::similarity::{Metric, VectorTable};

#[derive(Debug, thiserror::Error)]
pub enum MatchingError {
    #[error("cosine metric requires a vector table")]
    MissingVectors,
    #[error("threshold {0} outside (0, 1]")]
    BadThreshold(f64),
    #[error(transparent)]
    Write(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("bins file references headline id {0} absent from the corpus")]
    UnknownHeadline(String),
}

/// All headlines matched to one product.
///
/// The key is the canonical processed surface; member lists are sorted by
/// headline id, so bins do not depend on corpus order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductBin {
    pub product_key: String,
    pub label: String,
    pub leak_headlines: Vec<Headline>,
    pub pr_headlines: Vec<Headline>,
}

/// Result of binning: the bins plus ids of headlines left out.
#[derive(Debug)]
pub struct BinOutcome {
    pub bins: Vec<ProductBin>,
    /// Headlines with no recognized span, or whose span surface dissolves
    /// into stopwords.
    pub unbinned: Vec<String>,
}

/// Group headlines by product.
///
/// Each headline contributes its first recognized span; the span surface is
/// reduced to its canonical form and surfaces merge into one bin under
/// single-linkage at `similarity >= threshold`. The bin key is the
/// lexicographically smallest member surface, the label the majority label.
pub fn bin(
    corpus: &Corpus,
    spans: &[EntitySpan],
    metric: Metric,
    vectors: Option<&VectorTable>,
    threshold: f64,
    custom_stopwords: &StopwordSet,
) -> Result<BinOutcome, MatchingError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(MatchingError::BadThreshold(threshold));
    }
    if metric == Metric::Cosine && vectors.is_none() {
        return Err(MatchingError::MissingVectors);
    }

    // Leftmost span wins; ties prefer the longer span, then the smaller
    // label, so hand-written spans files bin the same in any line order.
    let span_rank = |s: &EntitySpan| (s.start, usize::MAX - s.end, s.label.clone());
    let mut first_span: BTreeMap<&str, &EntitySpan> = BTreeMap::new();
    for span in spans {
        first_span
            .entry(span.headline_id.as_str())
            .and_modify(|existing| {
                if span_rank(span) < span_rank(existing) {
                    *existing = span;
                }
            })
            .or_insert(span);
    }

    // Processed surface and label per binnable headline.
    let mut by_headline: BTreeMap<&str, (String, &str)> = BTreeMap::new();
    let mut unbinned = Vec::new();
    for h in corpus.headlines() {
        match first_span.get(h.id.as_str()) {
            Some(span) => {
                let key = process_product_name(&span.surface, custom_stopwords);
                if key.is_empty() {
                    unbinned.push(h.id.clone());
                } else {
                    by_headline.insert(&h.id, (key, &span.label));
                }
            }
            None => unbinned.push(h.id.clone()),
        }
    }

    // Single-linkage union-find over the distinct surfaces.
    let surfaces: Vec<String> = {
        let set: std::collections::BTreeSet<String> =
            by_headline.values().map(|(s, _)| s.clone()).collect();
        set.into_iter().collect()
    };
    let mut parent: Vec<usize> = (0..surfaces.len()).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..surfaces.len() {
        for j in (i + 1)..surfaces.len() {
            let sim = match metric {
                Metric::Jaccard => crate::similarity::jaccard(&surfaces[i], &surfaces[j]),
                Metric::Cosine => vectors
                    .expect("checked above")
                    .cosine(&surfaces[i], &surfaces[j]),
            };
            if sim >= threshold {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut canonical: BTreeMap<&str, &str> = BTreeMap::new();
    let mut component_key: BTreeMap<usize, &str> = BTreeMap::new();
    for (i, surface) in surfaces.iter().enumerate() {
        let root = find(&mut parent, i);
        // Surfaces are sorted, so the first member seen per root is smallest.
        let key = component_key.entry(root).or_insert(surface);
        canonical.insert(surface, key);
    }

    struct Accum<'a> {
        leak: Vec<&'a Headline>,
        pr: Vec<&'a Headline>,
        label_votes: BTreeMap<&'a str, usize>,
    }
    let mut accums: BTreeMap<&str, Accum> = BTreeMap::new();
    for h in corpus.headlines() {
        let Some((surface, label)) = by_headline.get(h.id.as_str()) else {
            continue;
        };
        let key = canonical[surface.as_str()];
        let acc = accums.entry(key).or_insert_with(|| Accum {
            leak: Vec::new(),
            pr: Vec::new(),
            label_votes: BTreeMap::new(),
        });
        match h.kind {
            HeadlineKind::Leak => acc.leak.push(h),
            HeadlineKind::PressRelease => acc.pr.push(h),
        }
        *acc.label_votes.entry(label).or_insert(0) += 1;
    }

    let bins = accums
        .into_iter()
        .map(|(key, mut acc)| {
            acc.leak.sort_by(|a, b| a.id.cmp(&b.id));
            acc.pr.sort_by(|a, b| a.id.cmp(&b.id));
            let label = acc
                .label_votes
                .iter()
                .max_by(|(la, va), (lb, vb)| va.cmp(vb).then(lb.cmp(la)))
                .map(|(l, _)| l.to_string())
                .expect("bin has at least one member");
            ProductBin {
                product_key: key.to_string(),
                label,
                leak_headlines: acc.leak.into_iter().cloned().collect(),
                pr_headlines: acc.pr.into_iter().cloned().collect(),
            }
        })
        .collect();
    Ok(BinOutcome { bins, unbinned })
}

/// Truth flags for one product as claimed by one blog.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TruthAssignment {
    pub blog: String,
    pub product_key: String,
    pub t: u8,
    pub f: u8,
    pub first_leak_time: Option<DateTime<Utc>>,
    pub first_pr_time: Option<DateTime<Utc>>,
}

/// Outcome of judging one bin for one blog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TruthDecision {
    Assigned(TruthAssignment),
    /// The bin holds no leak headlines from this blog.
    NotApplicable,
    /// Leak headlines exist but none carries a usable time.
    UndatableLeaks,
    /// No datable press-release counterpart and deferral was requested.
    Deferred,
}

/// Judge a blog's leak claim on one product.
///
/// The first leak time is the earliest effective time of the blog's leak
/// headlines in the bin; the first press-release time the earliest over all
/// press-release headlines. t=1 exactly when the leak strictly precedes the
/// press-release. A tie or a late leak gives f=1, and so does a missing
/// press-release counterpart ("never announced"), unless `defer_undefined`
/// postpones that case.
pub fn assign_truth(bin: &ProductBin, blog: &str, defer_undefined: bool) -> TruthDecision {
    let blog_leaks: Vec<&Headline> = bin
        .leak_headlines
        .iter()
        .filter(|h| h.source == blog)
        .collect();
    if blog_leaks.is_empty() {
        return TruthDecision::NotApplicable;
    }
    let first_leak_time = blog_leaks.iter().filter_map(|h| h.effective_time()).min();
    let Some(first_leak_time) = first_leak_time else {
        return TruthDecision::UndatableLeaks;
    };
    let first_pr_time = bin
        .pr_headlines
        .iter()
        .filter_map(|h| h.effective_time())
        .min();

    let (t, f) = match first_pr_time {
        Some(pr) if first_leak_time < pr => (1, 0),
        Some(_) => (0, 1),
        None if defer_undefined => return TruthDecision::Deferred,
        None => (0, 1),
    };
    TruthDecision::Assigned(TruthAssignment {
        blog: blog.to_string(),
        product_key: bin.product_key.clone(),
        t,
        f,
        first_leak_time: Some(first_leak_time),
        first_pr_time,
    })
}

#[derive(Serialize)]
struct BinRecord<'a> {
    product_key: &'a str,
    label: &'a str,
    leak_ids: Vec<&'a str>,
    pr_ids: Vec<&'a str>,
}

/// Export bins as a JSON array of id lists.
pub fn write_bins_json<W: Write>(bins: &[ProductBin], out: W) -> Result<(), MatchingError> {
    let records: Vec<BinRecord> = bins
        .iter()
        .map(|b| BinRecord {
            product_key: &b.product_key,
            label: &b.label,
            leak_ids: b.leak_headlines.iter().map(|h| h.id.as_str()).collect(),
            pr_ids: b.pr_headlines.iter().map(|h| h.id.as_str()).collect(),
        })
        .collect();
    serde_json::to_writer_pretty(out, &records)?;
    Ok(())
}

#[derive(Deserialize)]
struct BinRecordOwned {
    product_key: String,
    label: String,
    leak_ids: Vec<String>,
    pr_ids: Vec<String>,
}

/// Rebuild bins from an exported JSON file against the corpus that fed it.
pub fn load_bins(path: &std::path::Path, corpus: &Corpus) -> Result<Vec<ProductBin>, MatchingError> {
    let text = std::fs::read_to_string(path)?;
    let records: Vec<BinRecordOwned> = serde_json::from_str(&text)?;
    let resolve = |ids: &[String]| -> Result<Vec<Headline>, MatchingError> {
        ids.iter()
            .map(|id| {
                corpus
                    .get(id)
                    .cloned()
                    .ok_or_else(|| MatchingError::UnknownHeadline(id.clone()))
            })
            .collect()
    };
    records
        .iter()
        .map(|r| {
            Ok(ProductBin {
                product_key: r.product_key.clone(),
                label: r.label.clone(),
                leak_headlines: resolve(&r.leak_ids)?,
                pr_headlines: resolve(&r.pr_ids)?,
            })
        })
        .collect()
}

/// Export truth assignments as CSV rows
/// `blog,product_key,t,f,first_leak_time,first_pr_time`.
pub fn write_truth_csv<W: Write>(
    assignments: &[TruthAssignment],
    mut out: W,
) -> Result<(), MatchingError> {
    writeln!(out, "blog,product_key,t,f,first_leak_time,first_pr_time")?;
    for a in assignments {
        let fmt = |t: &Option<DateTime<Utc>>| {
            t.map(|t| t.to_rfc3339_opts(SecondsFormat::Secs, true))
                .unwrap_or_default()
        };
        writeln!(
            out,
            "{},{},{},{},{},{}",
            a.blog,
            a.product_key,
            a.t,
            a.f,
            fmt(&a.first_leak_time),
            fmt(&a.first_pr_time)
        )?;
    }
    Ok(())
}
