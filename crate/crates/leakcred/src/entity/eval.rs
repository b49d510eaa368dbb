//! Evaluation of predicted product names against human annotation:
//! similarity-thresholded accuracy, inter-annotator agreement (Cohen's
//! kappa), and the percentile rule used to pick the similarity threshold.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{lemmatize_name, process_product_name, StopwordSet};
use crate::similarity::{jaccard, Metric, VectorTable};

use super::EntityError;

/// One annotator's binary verdict on the predicted name for one headline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub headline_id: String,
    pub annotator: String,
    pub verdict: u8,
}

impl AnnotationRecord {
    /// Parse the CSV `headline_id,annotator,verdict` format; an optional
    /// header row is skipped.
    pub fn parse_csv(text: &str) -> Result<Vec<Self>, EntityError> {
        let mut records = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if line_no == 1 && line.eq_ignore_ascii_case("headline_id,annotator,verdict") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(EntityError::MalformedAnnotation {
                    line: line_no,
                    reason: format!("expected 3 comma-separated fields, got {}", fields.len()),
                });
            }
            let verdict = match fields[2].trim() {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(EntityError::MalformedAnnotation {
                        line: line_no,
                        reason: format!("verdict {other:?} is not 0 or 1"),
                    })
                }
            };
            records.push(Self {
                headline_id: fields[0].trim().to_string(),
                annotator: fields[1].trim().to_string(),
                verdict,
            });
        }
        Ok(records)
    }

    pub fn load(path: &Path) -> Result<Vec<Self>, EntityError> {
        let text = std::fs::read_to_string(path).map_err(|e| EntityError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse_csv(&text)
    }
}

/// One headline's predicted name next to the name the annotators settled on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalItem {
    pub headline_id: String,
    pub predicted: String,
    pub annotated: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeadlineEval {
    pub similarity: f64,
    pub correct: bool,
    /// All annotators gave the same verdict for this headline.
    pub agreed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    /// Fraction of agreed headlines whose similarity clears the threshold.
    pub accuracy: f64,
    pub agreed: usize,
    pub total: usize,
    pub threshold: f64,
    pub metric: String,
    pub per_headline: BTreeMap<String, HeadlineEval>,
}

/// Score predictions against annotated names.
///
/// Each prediction is lemmatized and stripped of custom stopwords, the
/// annotated name is lemmatized, and the two are compared under `metric`.
/// A prediction counts as correct at similarity ≥ `threshold`; accuracy is
/// taken over headlines whose annotators all agree.
pub fn evaluate(
    items: &[EvalItem],
    annotations: &[AnnotationRecord],
    metric: Metric,
    vectors: Option<&VectorTable>,
    threshold: f64,
    custom_stopwords: &StopwordSet,
) -> Result<EvaluationReport, EntityError> {
    if metric == Metric::Cosine && vectors.is_none() {
        return Err(EntityError::MissingVectors);
    }
    let mut verdicts: BTreeMap<&str, Vec<u8>> = BTreeMap::new();
    for a in annotations {
        verdicts.entry(&a.headline_id).or_default().push(a.verdict);
    }

    let mut per_headline = BTreeMap::new();
    let mut agreed_count = 0usize;
    let mut correct_agreed = 0usize;
    for item in items {
        let vs = verdicts
            .get(item.headline_id.as_str())
            .ok_or_else(|| EntityError::MissingAnnotation(item.headline_id.clone()))?;
        let agreed = vs.iter().all(|v| *v == vs[0]);
        let predicted = process_product_name(&item.predicted, custom_stopwords);
        let annotated = lemmatize_name(&item.annotated);
        let similarity = match metric {
            Metric::Jaccard => jaccard(&predicted, &annotated),
            Metric::Cosine => vectors
                .expect("checked above")
                .cosine(&predicted, &annotated),
        };
        let correct = similarity >= threshold;
        if agreed {
            agreed_count += 1;
            if correct {
                correct_agreed += 1;
            }
        }
        per_headline.insert(
            item.headline_id.clone(),
            HeadlineEval {
                similarity,
                correct,
                agreed,
            },
        );
    }
    if agreed_count == 0 {
        return Err(EntityError::NoAgreedHeadlines);
    }
    Ok(EvaluationReport {
        accuracy: correct_agreed as f64 / agreed_count as f64,
        agreed: agreed_count,
        total: items.len(),
        threshold,
        metric: metric.to_string(),
        per_headline,
    })
}

/// Cohen's kappa between two annotators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    /// Observed agreement.
    pub pr_a: f64,
    /// Chance agreement from the verdict marginals.
    pub pr_e: f64,
    pub kappa: f64,
    pub n: usize,
}

/// Cohen's kappa over two annotators' verdicts on the same headlines.
///
/// kappa = (pr_a - pr_e) / (1 - pr_e). When the marginals force pr_e = 1
/// the value is defined as 1 for perfect observed agreement and is an
/// error otherwise.
pub fn kappa(
    a1: &[AnnotationRecord],
    a2: &[AnnotationRecord],
) -> Result<AgreementReport, EntityError> {
    let m1: BTreeMap<&str, u8> = a1
        .iter()
        .map(|a| (a.headline_id.as_str(), a.verdict))
        .collect();
    let m2: BTreeMap<&str, u8> = a2
        .iter()
        .map(|a| (a.headline_id.as_str(), a.verdict))
        .collect();
    if m1.is_empty() || m1.len() != m2.len() || m1.keys().ne(m2.keys()) {
        let only_1: Vec<&&str> = m1.keys().filter(|k| !m2.contains_key(*k)).collect();
        let only_2: Vec<&&str> = m2.keys().filter(|k| !m1.contains_key(*k)).collect();
        return Err(EntityError::AnnotatorMismatch(format!(
            "{} ids only in first, {} only in second, {} shared",
            only_1.len(),
            only_2.len(),
            m1.len().min(m2.len()) - only_2.len().min(m1.len().min(m2.len()))
        )));
    }
    let n = m1.len();
    let mut matches = 0usize;
    let mut ones_1 = 0usize;
    let mut ones_2 = 0usize;
    for (id, v1) in &m1 {
        let v2 = m2[id];
        if *v1 == v2 {
            matches += 1;
        }
        ones_1 += *v1 as usize;
        ones_2 += v2 as usize;
    }
    let pr_a = matches as f64 / n as f64;
    let p1 = ones_1 as f64 / n as f64;
    let p2 = ones_2 as f64 / n as f64;
    let pr_e = p1 * p2 + (1.0 - p1) * (1.0 - p2);
    let kappa = if pr_e >= 1.0 {
        if pr_a >= 1.0 {
            1.0
        } else {
            return Err(EntityError::DegenerateMarginals);
        }
    } else {
        (pr_a - pr_e) / (1.0 - pr_e)
    };
    Ok(AgreementReport {
        pr_a,
        pr_e,
        kappa,
        n,
    })
}

/// Nearest-rank percentile: the smallest score such that at least
/// `percentile` percent of the scores are ≤ it.
pub fn percentile_threshold(scores: &[f64], percentile: f64) -> Result<f64, EntityError> {
    if scores.is_empty() {
        return Err(EntityError::EmptyScores);
    }
    if !(percentile > 0.0 && percentile < 100.0) {
        return Err(EntityError::BadPercentile(percentile));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let rank = ((percentile / 100.0) * n as f64).ceil() as usize;
    let rank = rank.clamp(1, n);
    Ok(sorted[rank - 1])
}
