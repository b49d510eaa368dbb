//! Product-name recognition: template-expanded training data, learned
//! context patterns, gazetteer matching with a pattern fallback for names
//! never seen before, and evaluation against human annotation.

mod eval;
mod recognizer;

pub use eval::{
    evaluate, kappa, percentile_threshold, AgreementReport, AnnotationRecord, EvalItem,
    EvaluationReport, HeadlineEval,
};
pub use recognizer::{recognize, Recognizer};

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::normalize;

#[derive(Debug, thiserror::Error)]
pub enum EntityError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("template {text:?} must contain the slot marker XXX exactly once")]
    BadSlot { text: String },
    #[error("template {text:?} has no context around the slot")]
    EmptyContext { text: String },
    #[error("label {0:?} does not match <Company>_sp")]
    BadLabel(String),
    #[error("gazetteer line {line}: {reason}")]
    MalformedGazetteer { line: usize, reason: String },
    #[error("pattern set invalid: {0}")]
    BadPatternSet(String),
    #[error("annotation line {line}: {reason}")]
    MalformedAnnotation { line: usize, reason: String },
    #[error("annotator id sets differ: {0}")]
    AnnotatorMismatch(String),
    #[error("chance agreement is 1 with imperfect observed agreement; kappa undefined")]
    DegenerateMarginals,
    #[error("headline {0} has no annotations")]
    MissingAnnotation(String),
    #[error("no headline with unanimous annotator verdicts; accuracy undefined")]
    NoAgreedHeadlines,
    #[error("cosine metric requires a vector table")]
    MissingVectors,
    #[error("empty score list")]
    EmptyScores,
    #[error("percentile {0} outside (0, 100)")]
    BadPercentile(f64),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// The literal slot marker inside template text.
pub const SLOT: &str = "XXX";

/// A generic headline sentence with one product-name slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub text: String,
    pub company_hint: Option<String>,
}

impl Template {
    pub fn new(text: &str, company_hint: Option<&str>) -> Result<Self, EntityError> {
        if text.matches(SLOT).count() != 1 {
            return Err(EntityError::BadSlot {
                text: text.to_string(),
            });
        }
        let (left, right) = text.split_once(SLOT).expect("slot presence checked");
        if normalize(left).is_empty() && normalize(right).is_empty() {
            return Err(EntityError::EmptyContext {
                text: text.to_string(),
            });
        }
        if let Some(hint) = company_hint {
            validate_label(hint)?;
        }
        Ok(Self {
            text: text.to_string(),
            company_hint: company_hint.map(str::to_string),
        })
    }

    /// Parse the template file format: one template per line, optional
    /// `<TAB>company_hint`, `#` comments allowed.
    pub fn parse_file(text: &str) -> Result<Vec<Self>, EntityError> {
        let mut templates = Vec::new();
        for line in text.lines() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (body, hint) = match line.split_once('\t') {
                Some((b, h)) => (b, Some(h.trim())),
                None => (line, None),
            };
            templates.push(Template::new(body, hint.filter(|h| !h.is_empty()))?);
        }
        Ok(templates)
    }

    pub fn load(path: &Path) -> Result<Vec<Self>, EntityError> {
        let text = std::fs::read_to_string(path).map_err(|e| EntityError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse_file(&text)
    }
}

fn validate_label(label: &str) -> Result<(), EntityError> {
    let company = label
        .strip_suffix("_sp")
        .ok_or_else(|| EntityError::BadLabel(label.to_string()))?;
    if company.is_empty() || !company.chars().all(|c| c.is_ascii_alphabetic()) {
        return Err(EntityError::BadLabel(label.to_string()));
    }
    Ok(())
}

/// Dictionary of known product names mapped to company labels.
///
/// Names are stored normalized; labels follow `<Company>_sp`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Gazetteer {
    entries: BTreeMap<String, String>,
}

impl Gazetteer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, label: &str) -> Result<(), EntityError> {
        validate_label(label)?;
        let name = normalize(name);
        if !name.is_empty() {
            self.entries.insert(name, label.to_string());
        }
        Ok(())
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    pub fn label_of(&self, name: &str) -> Option<&str> {
        self.entries.get(name).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct company labels.
    pub fn companies(&self) -> std::collections::BTreeSet<&str> {
        self.entries.values().map(String::as_str).collect()
    }

    /// Parse the TSV `name<TAB>label` format; `#` comments allowed.
    pub fn parse_tsv(text: &str) -> Result<Self, EntityError> {
        let mut g = Self::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, label) =
                line.split_once('\t')
                    .ok_or_else(|| EntityError::MalformedGazetteer {
                        line: line_no,
                        reason: "expected name<TAB>label".to_string(),
                    })?;
            g.insert(name, label.trim())
                .map_err(|e| EntityError::MalformedGazetteer {
                    line: line_no,
                    reason: e.to_string(),
                })?;
        }
        Ok(g)
    }

    pub fn load(path: &Path) -> Result<Self, EntityError> {
        let text = std::fs::read_to_string(path).map_err(|e| EntityError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse_tsv(&text)
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (name, label) in &self.entries {
            writeln!(out, "{name}\t{label}")?;
        }
        Ok(())
    }
}

/// One synthetic training headline with its gold span.
///
/// Text is normalized; the span is in char offsets and covers exactly the
/// substituted name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingExample {
    pub text: String,
    pub start: usize,
    pub end: usize,
    pub name: String,
    pub label: String,
}

/// Substitute every gazetteer name into every template.
///
/// Templates carrying a company hint only accept names with that label.
/// Fragments around the slot are normalized and joined to the name with
/// single spaces, so gold offsets are exact by construction.
pub fn expand_templates(
    templates: &[Template],
    gazetteer: &Gazetteer,
) -> Result<Vec<TrainingExample>, EntityError> {
    let mut out = Vec::new();
    for template in templates {
        let (left_raw, right_raw) = template
            .text
            .split_once(SLOT)
            .ok_or_else(|| EntityError::BadSlot {
                text: template.text.clone(),
            })?;
        let left = normalize(left_raw);
        let right = normalize(right_raw);
        for (name, label) in gazetteer.entries() {
            if let Some(hint) = &template.company_hint {
                if hint != label {
                    continue;
                }
            }
            let name_len = name.chars().count();
            let (text, start) = match (left.is_empty(), right.is_empty()) {
                (true, true) => unreachable!("templates validate non-empty context"),
                (true, false) => (format!("{name} {right}"), 0),
                (false, true) => (format!("{left} {name}"), left.chars().count() + 1),
                (false, false) => (
                    format!("{left} {name} {right}"),
                    left.chars().count() + 1,
                ),
            };
            out.push(TrainingExample {
                text,
                start,
                end: start + name_len,
                name: name.clone(),
                label: label.clone(),
            });
        }
    }
    Ok(out)
}

/// Tokens flanking a product-name slot, learned from training examples.
///
/// `left`/`right` hold up to two tokens each, nearest the slot last on the
/// left and first on the right; they are never both empty. `weight` counts
/// supporting examples; `label_weights` the company labels behind them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextPattern {
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub weight: u64,
    pub label_weights: BTreeMap<String, u64>,
}

impl ContextPattern {
    /// Highest-weight company label; ties break lexicographically.
    pub fn majority_label(&self) -> Option<&str> {
        self.label_weights
            .iter()
            .max_by(|(la, wa), (lb, wb)| wa.cmp(wb).then(lb.cmp(la)))
            .map(|(l, _)| l.as_str())
    }

    fn validate(&self) -> Result<(), EntityError> {
        if self.left.is_empty() && self.right.is_empty() {
            return Err(EntityError::BadPatternSet(
                "pattern with both contexts empty".to_string(),
            ));
        }
        if self.left.len() > 2 || self.right.len() > 2 {
            return Err(EntityError::BadPatternSet(
                "pattern context longer than 2 tokens".to_string(),
            ));
        }
        if self.weight == 0 {
            return Err(EntityError::BadPatternSet("pattern weight 0".to_string()));
        }
        Ok(())
    }
}

/// An ordered, deduplicated collection of context patterns.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSet {
    pub patterns: Vec<ContextPattern>,
}

impl PatternSet {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<(), EntityError> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, EntityError> {
        let text = std::fs::read_to_string(path).map_err(|e| EntityError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let set: PatternSet = serde_json::from_str(&text)?;
        for p in &set.patterns {
            p.validate()?;
        }
        Ok(set)
    }
}

/// Learn context patterns from gold spans.
///
/// For each example the up-to-two tokens on each side of the span form a
/// pattern; identical patterns merge, accumulating weight and per-label
/// counts. Output order is sorted, so the result is independent of input
/// order.
pub fn learn_patterns(examples: &[TrainingExample]) -> PatternSet {
    use crate::corpus::token_spans;

    // (left flank, right flank) -> (total weight, per-label counts).
    type Flanks = (Vec<String>, Vec<String>);
    type Counts = (u64, BTreeMap<String, u64>);
    let mut merged: BTreeMap<Flanks, Counts> = BTreeMap::new();
    for ex in examples {
        let spans = token_spans(&ex.text);
        let before: Vec<&str> = spans
            .iter()
            .filter(|s| s.char_end <= ex.start)
            .map(|s| s.text.as_str())
            .collect();
        let after: Vec<&str> = spans
            .iter()
            .filter(|s| s.char_start >= ex.end)
            .map(|s| s.text.as_str())
            .collect();
        let left: Vec<String> = before
            .iter()
            .rev()
            .take(2)
            .rev()
            .map(|s| s.to_string())
            .collect();
        let right: Vec<String> = after.iter().take(2).map(|s| s.to_string()).collect();
        if left.is_empty() && right.is_empty() {
            continue;
        }
        let entry = merged.entry((left, right)).or_default();
        entry.0 += 1;
        *entry.1.entry(ex.label.clone()).or_insert(0) += 1;
    }
    PatternSet {
        patterns: merged
            .into_iter()
            .map(|((left, right), (weight, label_weights))| ContextPattern {
                left,
                right,
                weight,
                label_weights,
            })
            .collect(),
    }
}

/// Where a recognized span came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpanOrigin {
    #[serde(rename = "gazetteer")]
    Gazetteer,
    #[serde(rename = "pattern")]
    Pattern,
}

/// A recognized product name inside one headline.
///
/// Offsets are char positions into the headline's stored text and
/// `surface` equals that slice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySpan {
    pub headline_id: String,
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub label: String,
    pub origin: SpanOrigin,
}

/// Write spans as JSONL.
pub fn write_spans<W: Write>(spans: &[EntitySpan], mut out: W) -> Result<(), EntityError> {
    for span in spans {
        let line = serde_json::to_string(span)?;
        writeln!(out, "{line}").map_err(|e| EntityError::Io {
            path: "<writer>".to_string(),
            source: e,
        })?;
    }
    Ok(())
}

/// Read spans from a JSONL reader.
pub fn read_spans<R: BufRead>(reader: R) -> Result<Vec<EntitySpan>, EntityError> {
    let mut spans = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| EntityError::Io {
            path: "<reader>".to_string(),
            source: e,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        spans.push(serde_json::from_str(&line)?);
    }
    Ok(spans)
}

pub fn load_spans(path: &Path) -> Result<Vec<EntitySpan>, EntityError> {
    let file = std::fs::File::open(path).map_err(|e| EntityError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_spans(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_gazetteer() -> Gazetteer {
        let mut g = Gazetteer::new();
        g.insert("Galaxy S10", "Samsung_sp").unwrap();
        g.insert("galaxy note 9", "Samsung_sp").unwrap();
        g.insert("iPhone XR", "Apple_sp").unwrap();
        g
    }

    #[test]
    fn template_requires_exactly_one_slot() {
        assert!(Template::new("XXX release date", None).is_ok());
        assert!(Template::new("no slot here", None).is_err());
        assert!(Template::new("XXX vs XXX", None).is_err());
        assert!(Template::new("XXX", None).is_err());
    }

    #[test]
    fn template_file_parses_hints() {
        let text = "# comment\nXXX release date, specs\nintroducing XXX\tSamsung_sp\n\n";
        let templates = Template::parse_file(text).unwrap();
        assert_eq!(templates.len(), 2);
        assert_eq!(templates[0].company_hint, None);
        assert_eq!(templates[1].company_hint.as_deref(), Some("Samsung_sp"));
    }

    #[test]
    fn gazetteer_normalizes_names_and_checks_labels() {
        let g = demo_gazetteer();
        assert_eq!(g.label_of("galaxy s10"), Some("Samsung_sp"));
        assert_eq!(g.label_of("iphone xr"), Some("Apple_sp"));
        assert_eq!(g.companies().len(), 2);

        let mut bad = Gazetteer::new();
        assert!(bad.insert("thing", "Samsung").is_err());
        assert!(bad.insert("thing", "Sams_ung_sp").is_err());
        assert!(bad.insert("thing", "_sp").is_err());
    }

    #[test]
    fn gazetteer_tsv_round_trip() {
        let g = demo_gazetteer();
        let mut buf = Vec::new();
        g.write_tsv(&mut buf).unwrap();
        let reread = Gazetteer::parse_tsv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(g, reread);
    }

    #[test]
    fn expand_is_cartesian_product() {
        let templates = vec![
            Template::new("XXX release date, specs", None).unwrap(),
            Template::new("introducing XXX", None).unwrap(),
        ];
        let out = expand_templates(&templates, &demo_gazetteer()).unwrap();
        assert_eq!(out.len(), 6);
    }

    #[test]
    fn expand_slot_at_start_offsets() {
        let templates = vec![Template::new("XXX release date, specs", None).unwrap()];
        let mut g = Gazetteer::new();
        g.insert("galaxy s10", "Samsung_sp").unwrap();
        let out = expand_templates(&templates, &g).unwrap();
        assert_eq!(out.len(), 1);
        let ex = &out[0];
        assert_eq!(ex.text, "galaxy s10 release date, specs");
        assert_eq!((ex.start, ex.end), (0, 10));
        assert_eq!(
            crate::corpus::slice_chars(&ex.text, ex.start, ex.end),
            "galaxy s10"
        );
    }

    #[test]
    fn expand_mid_and_end_offsets() {
        let templates = vec![
            Template::new("introducing XXX", None).unwrap(),
            Template::new("the new XXX leaked today", None).unwrap(),
        ];
        let mut g = Gazetteer::new();
        g.insert("iphone xr", "Apple_sp").unwrap();
        for ex in expand_templates(&templates, &g).unwrap() {
            assert_eq!(
                crate::corpus::slice_chars(&ex.text, ex.start, ex.end),
                "iphone xr"
            );
        }
    }

    #[test]
    fn expand_honors_company_hint() {
        let templates = vec![Template::new("introducing XXX", Some("Samsung_sp")).unwrap()];
        let out = expand_templates(&templates, &demo_gazetteer()).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|ex| ex.label == "Samsung_sp"));
    }

    #[test]
    fn learn_patterns_single_template() {
        let templates = vec![Template::new("XXX leaked today", None).unwrap()];
        let out = expand_templates(&templates, &demo_gazetteer()).unwrap();
        let set = learn_patterns(&out);
        assert_eq!(set.len(), 1);
        let p = &set.patterns[0];
        assert!(p.left.is_empty());
        assert_eq!(p.right, vec!["leaked", "today"]);
        assert_eq!(p.weight, 3);
        assert_eq!(p.majority_label(), Some("Samsung_sp"));
    }

    #[test]
    fn learn_patterns_merges_shared_context() {
        // Same flanking tokens from two templates accumulate weight.
        let templates = vec![
            Template::new("new XXX leaked", None).unwrap(),
            Template::new("brand new XXX leaked now", None).unwrap(),
        ];
        let mut g = Gazetteer::new();
        g.insert("galaxy s10", "Samsung_sp").unwrap();
        let out = expand_templates(&templates, &g).unwrap();
        let set = learn_patterns(&out);
        let shared: Vec<_> = set
            .patterns
            .iter()
            .filter(|p| p.right.first().map(String::as_str) == Some("leaked"))
            .collect();
        // Contexts differ in the second token, so they stay distinct here,
        // but identical single-template repeats do merge.
        assert!(!shared.is_empty());
        let repeated = learn_patterns(&[out[0].clone(), out[0].clone()]);
        assert_eq!(repeated.len(), 1);
        assert_eq!(repeated.patterns[0].weight, 2);
    }

    #[test]
    fn learn_patterns_empty_corpus() {
        assert!(learn_patterns(&[]).is_empty());
    }

    #[test]
    fn pattern_majority_label_breaks_ties_lexicographically() {
        let p = ContextPattern {
            left: vec![],
            right: vec!["leaked".to_string()],
            weight: 4,
            label_weights: [("Samsung_sp".to_string(), 2), ("Apple_sp".to_string(), 2)]
                .into_iter()
                .collect(),
        };
        assert_eq!(p.majority_label(), Some("Apple_sp"));
    }

    #[test]
    fn pattern_set_json_round_trip() {
        let templates = vec![Template::new("XXX leaked today", None).unwrap()];
        let out = expand_templates(&templates, &demo_gazetteer()).unwrap();
        let set = learn_patterns(&out);
        let mut buf = Vec::new();
        set.write_json(&mut buf).unwrap();
        let reread: PatternSet = serde_json::from_slice(&buf).unwrap();
        assert_eq!(set, reread);
    }

    #[test]
    fn span_jsonl_round_trip() {
        let spans = vec![EntitySpan {
            headline_id: "abc".to_string(),
            start: 0,
            end: 10,
            surface: "Galaxy S10".to_string(),
            label: "Samsung_sp".to_string(),
            origin: SpanOrigin::Gazetteer,
        }];
        let mut buf = Vec::new();
        write_spans(&spans, &mut buf).unwrap();
        let reread = read_spans(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(spans, reread);
    }
}
