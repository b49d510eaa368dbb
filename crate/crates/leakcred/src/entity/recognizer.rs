//! Two-pass product-name recognition: gazetteer scan first, learned
//! context-pattern fallback for names the gazetteer has never seen.

use std::collections::HashMap;

use crate::corpus::{lemmatize, slice_chars, token_spans, Headline, StopwordSet, TokenSpan};

use super::{ContextPattern, EntitySpan, Gazetteer, PatternSet, SpanOrigin};

struct GazEntry {
    tokens: Vec<String>,
    label: String,
}

/// Immutable recognizer assets: a token-indexed gazetteer, a context-pattern
/// index, and the custom stopwords barred from candidate runs.
pub struct Recognizer {
    by_first_token: HashMap<String, Vec<GazEntry>>,
    patterns: Vec<ContextPattern>,
    pattern_index: HashMap<(Vec<String>, Vec<String>), usize>,
    custom_stopwords: StopwordSet,
}

/// Longest candidate run considered by the pattern fallback, in tokens.
const MAX_RUN_TOKENS: usize = 4;

impl Recognizer {
    pub fn new(gazetteer: &Gazetteer, patterns: &PatternSet, custom_stopwords: StopwordSet) -> Self {
        let mut by_first_token: HashMap<String, Vec<GazEntry>> = HashMap::new();
        for (name, label) in gazetteer.entries() {
            let tokens: Vec<String> = crate::corpus::tokenize(name);
            if tokens.is_empty() {
                continue;
            }
            by_first_token
                .entry(tokens[0].clone())
                .or_default()
                .push(GazEntry {
                    tokens,
                    label: label.clone(),
                });
        }
        let mut pattern_index = HashMap::new();
        for (i, p) in patterns.patterns.iter().enumerate() {
            pattern_index.insert((p.left.clone(), p.right.clone()), i);
        }
        Self {
            by_first_token,
            patterns: patterns.patterns.clone(),
            pattern_index,
            custom_stopwords,
        }
    }

    /// Recognize product names in one headline.
    ///
    /// Pass 1 scans the token stream against the gazetteer, longest match
    /// first, leftmost on ties. Only when pass 1 finds nothing, pass 2
    /// proposes token runs of 1 to 4 non-stopword tokens whose flanking
    /// tokens reproduce a learned context pattern and which carry a digit
    /// or a capitalized token; the winning pattern's majority label is
    /// attached. Returned spans never overlap.
    pub fn recognize(&self, headline: &Headline) -> Vec<EntitySpan> {
        let spans = token_spans(&headline.text);
        let lower: Vec<String> = spans.iter().map(|s| s.text.to_lowercase()).collect();

        let mut found = self.gazetteer_pass(&lower);
        let origin = if found.is_empty() {
            found = self.pattern_pass(&spans, &lower);
            SpanOrigin::Pattern
        } else {
            SpanOrigin::Gazetteer
        };

        let mut chosen = resolve_overlaps(found);
        chosen.sort_by_key(|c| c.token_start);
        chosen
            .into_iter()
            .map(|c| {
                let start = spans[c.token_start].char_start;
                let end = spans[c.token_start + c.token_len - 1].char_end;
                EntitySpan {
                    headline_id: headline.id.clone(),
                    start,
                    end,
                    surface: slice_chars(&headline.text, start, end).to_string(),
                    label: c.label,
                    origin,
                }
            })
            .collect()
    }

    fn gazetteer_pass(&self, lower: &[String]) -> Vec<Candidate> {
        let mut found = Vec::new();
        for i in 0..lower.len() {
            let Some(entries) = self.by_first_token.get(&lower[i]) else {
                continue;
            };
            for entry in entries {
                let len = entry.tokens.len();
                if i + len <= lower.len() && lower[i..i + len] == entry.tokens[..] {
                    found.push(Candidate {
                        token_start: i,
                        token_len: len,
                        label: entry.label.clone(),
                    });
                }
            }
        }
        found
    }

    fn is_custom_stopword(&self, token: &str) -> bool {
        self.custom_stopwords.contains(token) || self.custom_stopwords.contains(&lemmatize(token))
    }

    fn pattern_pass(&self, spans: &[TokenSpan], lower: &[String]) -> Vec<Candidate> {
        if self.patterns.is_empty() {
            return Vec::new();
        }
        let n = lower.len();
        let eligible: Vec<bool> = lower.iter().map(|t| !self.is_custom_stopword(t)).collect();
        let mut found = Vec::new();
        for i in 0..n {
            if !eligible[i] {
                continue;
            }
            for len in 1..=MAX_RUN_TOKENS {
                let j = i + len;
                if j > n || !eligible[j - 1] {
                    break;
                }
                if !has_content(&spans[i..j], &lower[i..j]) {
                    continue;
                }
                if let Some(pattern) = self.best_matching_pattern(lower, i, j) {
                    found.push(Candidate {
                        token_start: i,
                        token_len: len,
                        label: pattern
                            .majority_label()
                            .unwrap_or("Unknown_sp")
                            .to_string(),
                    });
                }
            }
        }
        found
    }

    /// The highest-weight pattern whose contexts equal the run's flanking
    /// tokens; a pattern's empty side imposes no constraint.
    fn best_matching_pattern(&self, lower: &[String], i: usize, j: usize) -> Option<&ContextPattern> {
        let mut best: Option<&ContextPattern> = None;
        for left_len in 0..=2usize.min(i) {
            let left: Vec<String> = lower[i - left_len..i].to_vec();
            for right_len in 0..=2usize.min(lower.len() - j) {
                if left_len == 0 && right_len == 0 {
                    continue;
                }
                let right: Vec<String> = lower[j..j + right_len].to_vec();
                if let Some(&idx) = self.pattern_index.get(&(left.clone(), right)) {
                    let p = &self.patterns[idx];
                    if best.is_none_or(|b| p.weight > b.weight) {
                        best = Some(p);
                    }
                }
            }
        }
        best
    }
}

/// At least one token carries a digit or starts uppercase in the raw text.
fn has_content(raw: &[TokenSpan], lower: &[String]) -> bool {
    lower.iter().any(|t| t.chars().any(|c| c.is_ascii_digit()))
        || raw
            .iter()
            .any(|s| s.text.chars().next().is_some_and(char::is_uppercase))
}

#[derive(Debug, Clone)]
struct Candidate {
    token_start: usize,
    token_len: usize,
    label: String,
}

/// Keep a non-overlapping subset, preferring longer candidates, then
/// leftmost.
fn resolve_overlaps(mut candidates: Vec<Candidate>) -> Vec<Candidate> {
    candidates.sort_by(|a, b| {
        b.token_len
            .cmp(&a.token_len)
            .then(a.token_start.cmp(&b.token_start))
    });
    let mut chosen: Vec<Candidate> = Vec::new();
    for c in candidates {
        let overlaps = chosen.iter().any(|k| {
            c.token_start < k.token_start + k.token_len && k.token_start < c.token_start + c.token_len
        });
        if !overlaps {
            chosen.push(c);
        }
    }
    chosen
}

/// One-shot convenience wrapper; batch callers should build a [`Recognizer`]
/// once and reuse it.
pub fn recognize(
    headline: &Headline,
    gazetteer: &Gazetteer,
    patterns: &PatternSet,
) -> Vec<EntitySpan> {
    Recognizer::new(gazetteer, patterns, StopwordSet::builtin_custom()).recognize(headline)
}
