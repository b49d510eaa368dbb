//! Token-set and embedding similarity between product-name strings.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use crate::corpus::tokenize;

/// Similarity metric selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Jaccard,
    Cosine,
}

impl std::str::FromStr for Metric {
    type Err = SimilarityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jaccard" => Ok(Metric::Jaccard),
            "cosine" => Ok(Metric::Cosine),
            other => Err(SimilarityError::UnknownMetric(other.to_string())),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::Jaccard => write!(f, "jaccard"),
            Metric::Cosine => write!(f, "cosine"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimilarityError {
    #[error("unknown metric {0:?} (expected jaccard or cosine)")]
    UnknownMetric(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("vector file line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

/// Jaccard similarity of the token sets of two strings.
///
/// |A ∩ B| / |A ∪ B|; both empty yields 1.0. Symmetric, and 1.0 exactly
/// when the token sets coincide.
pub fn jaccard(a: &str, b: &str) -> f64 {
    let sa: BTreeSet<String> = tokenize(a).into_iter().collect();
    let sb: BTreeSet<String> = tokenize(b).into_iter().collect();
    if sa.is_empty() && sb.is_empty() {
        return 1.0;
    }
    let inter = sa.intersection(&sb).count();
    let union = sa.union(&sb).count();
    inter as f64 / union as f64
}

/// Word-vector table backed by the `V D` text format:
/// a header line with vocabulary size and dimension, then one
/// `word f1 .. fD` row per word.
#[derive(Debug, Clone)]
pub struct VectorTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl VectorTable {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            vectors: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn insert(&mut self, word: &str, vector: Vec<f64>) -> Result<(), SimilarityError> {
        if vector.len() != self.dim {
            return Err(SimilarityError::Malformed {
                line: 0,
                reason: format!(
                    "vector for {word:?} has {} components, table dimension is {}",
                    vector.len(),
                    self.dim
                ),
            });
        }
        self.vectors.insert(word.to_string(), vector);
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    pub fn load(path: &Path) -> Result<Self, SimilarityError> {
        let file = std::fs::File::open(path).map_err(|e| SimilarityError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::read(std::io::BufReader::new(file))
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self, SimilarityError> {
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or(SimilarityError::Malformed {
            line: 1,
            reason: "missing header".to_string(),
        })?;
        let header = header.map_err(|e| SimilarityError::Malformed {
            line: 1,
            reason: e.to_string(),
        })?;
        let mut parts = header.split_whitespace();
        let vocab: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or(SimilarityError::Malformed {
                line: 1,
                reason: "header must start with the vocabulary size".to_string(),
            })?;
        let dim: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or(SimilarityError::Malformed {
                line: 1,
                reason: "header must carry the vector dimension".to_string(),
            })?;
        let mut table = Self::new(dim);
        for (idx, line) in lines {
            let line_no = idx + 1;
            let line = line.map_err(|e| SimilarityError::Malformed {
                line: line_no,
                reason: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let word = fields.next().unwrap();
            let values: Result<Vec<f64>, _> = fields.map(str::parse).collect();
            let values = values.map_err(|e| SimilarityError::Malformed {
                line: line_no,
                reason: format!("bad component: {e}"),
            })?;
            if values.len() != dim {
                return Err(SimilarityError::Malformed {
                    line: line_no,
                    reason: format!("expected {dim} components, got {}", values.len()),
                });
            }
            table.vectors.insert(word.to_string(), values);
        }
        if table.vectors.len() != vocab {
            return Err(SimilarityError::Malformed {
                line: 1,
                reason: format!(
                    "header declares {vocab} words, file holds {}",
                    table.vectors.len()
                ),
            });
        }
        Ok(table)
    }

    /// Mean of the vectors of the in-vocabulary tokens of `text`.
    /// None when every token is out of vocabulary.
    pub fn mean_embedding(&self, text: &str) -> Option<Vec<f64>> {
        let mut sum = vec![0.0; self.dim];
        let mut count = 0usize;
        for token in tokenize(text) {
            if let Some(v) = self.vectors.get(&token) {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
                count += 1;
            }
        }
        if count == 0 {
            return None;
        }
        for s in &mut sum {
            *s /= count as f64;
        }
        Some(sum)
    }

    /// Cosine similarity of the mean token embeddings of two strings.
    ///
    /// 0.0 when either side is entirely out of vocabulary or has a zero
    /// mean vector.
    pub fn cosine(&self, a: &str, b: &str) -> f64 {
        let (Some(va), Some(vb)) = (self.mean_embedding(a), self.mean_embedding(b)) else {
            return 0.0;
        };
        cosine_of(&va, &vb)
    }

    /// Similarity of two strings under the chosen metric.
    pub fn similarity(&self, metric: Metric, a: &str, b: &str) -> f64 {
        match metric {
            Metric::Jaccard => jaccard(a, b),
            Metric::Cosine => self.cosine(a, b),
        }
    }
}

fn cosine_of(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na * nb)
}
