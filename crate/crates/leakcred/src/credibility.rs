//! Per-blog credibility ledger: verified (t) and falsified (f) leak claims
//! per product, an exact running score, an audit trail of every change, and
//! locked persistence.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::os::unix::io::AsRawFd;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::matching::TruthAssignment;

#[derive(Debug, thiserror::Error)]
pub enum CredibilityError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("ledger {0} is locked by another writer")]
    Busy(String),
    #[error("ledger {path} is corrupt: {reason}")]
    Corrupt { path: String, reason: String },
    #[error("assignment for blog {got:?} applied to ledger of {expected:?}")]
    BlogMismatch { expected: String, got: String },
    #[error("flags t={t}, f={f} violate t,f ∈ {{0,1}}, t+f ≤ 1")]
    InvalidFlags { t: u8, f: u8 },
    #[error("assignment carries no timestamp to date the decision")]
    UndecidableTime,
}

/// The credibility score as an exact rational: Σ(t − 2f) over n entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Score {
    pub sum: i64,
    pub n: usize,
}

impl Score {
    /// Decimal value; an empty ledger scores the default 0.
    pub fn value(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum as f64 / self.n as f64
        }
    }

    /// True when the ledger has no entries and 0 is only the default.
    pub fn is_unscored(&self) -> bool {
        self.n == 0
    }
}

/// One product's verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub t: u8,
    pub f: u8,
    pub decided_at: DateTime<Utc>,
}

impl LedgerEntry {
    fn delta(&self) -> i64 {
        self.t as i64 - 2 * self.f as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventCause {
    #[serde(rename = "new_true")]
    NewTrue,
    #[serde(rename = "new_false")]
    NewFalse,
    #[serde(rename = "revision")]
    Revision,
}

/// One audited score change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEvent {
    pub blog: String,
    pub product_key: String,
    pub prior_score: f64,
    pub new_score: f64,
    pub cause: EventCause,
}

/// Running tally of one blog's leak claims.
///
/// The score is Eq-style Σ(t − 2f)/n kept as an exact integer numerator,
/// so incremental updates and batch recomputation agree bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredibilityLedger {
    blog: String,
    entries: BTreeMap<String, LedgerEntry>,
    audit: Vec<ScoreEvent>,
    #[serde(skip)]
    sum: i64,
}

impl CredibilityLedger {
    pub fn new(blog: &str) -> Self {
        Self {
            blog: blog.to_string(),
            entries: BTreeMap::new(),
            audit: Vec::new(),
            sum: 0,
        }
    }

    pub fn blog(&self) -> &str {
        &self.blog
    }

    pub fn entries(&self) -> &BTreeMap<String, LedgerEntry> {
        &self.entries
    }

    pub fn audit(&self) -> &[ScoreEvent] {
        &self.audit
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Current score; exact and permutation-invariant.
    pub fn score(&self) -> Score {
        Score {
            sum: self.sum,
            n: self.entries.len(),
        }
    }

    /// Recompute the numerator from scratch (oracle for the running sum).
    pub fn batch_sum(&self) -> i64 {
        self.entries.values().map(LedgerEntry::delta).sum()
    }

    /// Fold one truth assignment into the ledger.
    ///
    /// A brand-new product inserts an entry (cause new_true/new_false); a
    /// changed verdict revises it (cause revision) — a press-release landing
    /// after a provisional "never announced" flips f back to t this way.
    /// Replaying an identical assignment is a no-op and returns None, so
    /// re-running a pipeline never inflates the audit log. The decision
    /// instant is the latest timestamp that informed it.
    pub fn update(
        &mut self,
        assignment: &TruthAssignment,
    ) -> Result<Option<ScoreEvent>, CredibilityError> {
        if assignment.blog != self.blog {
            return Err(CredibilityError::BlogMismatch {
                expected: self.blog.clone(),
                got: assignment.blog.clone(),
            });
        }
        if assignment.t > 1 || assignment.f > 1 || assignment.t + assignment.f > 1 {
            return Err(CredibilityError::InvalidFlags {
                t: assignment.t,
                f: assignment.f,
            });
        }
        let decided_at = match (assignment.first_leak_time, assignment.first_pr_time) {
            (Some(a), Some(b)) => a.max(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => return Err(CredibilityError::UndecidableTime),
        };
        let entry = LedgerEntry {
            t: assignment.t,
            f: assignment.f,
            decided_at,
        };
        let prior_score = self.score().value();
        let cause = match self.entries.get(&assignment.product_key) {
            Some(existing) if (existing.t, existing.f) == (entry.t, entry.f) => return Ok(None),
            Some(existing) => {
                self.sum -= existing.delta();
                EventCause::Revision
            }
            None if entry.t == 1 => EventCause::NewTrue,
            None => EventCause::NewFalse,
        };
        self.sum += entry.delta();
        self.entries.insert(assignment.product_key.clone(), entry);
        let event = ScoreEvent {
            blog: self.blog.clone(),
            product_key: assignment.product_key.clone(),
            prior_score,
            new_score: self.score().value(),
            cause,
        };
        self.audit.push(event.clone());
        Ok(Some(event))
    }

    /// Write the ledger under the exclusive file lock.
    pub fn persist(&self, path: &Path) -> Result<(), CredibilityError> {
        let lock = LedgerLock::acquire(path)?;
        self.persist_with(path, &lock)
    }

    /// Write the ledger while the caller already holds its lock.
    ///
    /// The file is replaced atomically; the audit array only ever grows
    /// across persists of the same evolving ledger.
    pub fn persist_with(&self, path: &Path, lock: &LedgerLock) -> Result<(), CredibilityError> {
        debug_assert_eq!(lock.ledger_path, path);
        let json = serde_json::to_string_pretty(self).map_err(|e| CredibilityError::Corrupt {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let tmp = path.with_extension("json.tmp");
        let io_err = |e: std::io::Error| CredibilityError::Io {
            path: path.display().to_string(),
            source: e,
        };
        let mut file = std::fs::File::create(&tmp).map_err(io_err)?;
        file.write_all(json.as_bytes()).map_err(io_err)?;
        file.write_all(b"\n").map_err(io_err)?;
        file.sync_all().map_err(io_err)?;
        std::fs::rename(&tmp, path).map_err(io_err)?;
        Ok(())
    }

    /// Load and validate a persisted ledger.
    ///
    /// Anything structurally off — unparsable JSON, out-of-domain flags, an
    /// audit trail that disagrees with the entries — fails closed.
    pub fn load(path: &Path) -> Result<Self, CredibilityError> {
        let text = std::fs::read_to_string(path).map_err(|e| CredibilityError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let corrupt = |reason: String| CredibilityError::Corrupt {
            path: path.display().to_string(),
            reason,
        };
        if text.trim().is_empty() {
            return Err(corrupt("file is empty".to_string()));
        }
        let mut ledger: CredibilityLedger =
            serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
        if ledger.blog.is_empty() {
            return Err(corrupt("blog id is empty".to_string()));
        }
        for (key, entry) in &ledger.entries {
            if entry.t > 1 || entry.f > 1 || entry.t + entry.f > 1 {
                return Err(corrupt(format!(
                    "entry {key:?} has flags t={}, f={}",
                    entry.t, entry.f
                )));
            }
        }
        ledger.sum = ledger.batch_sum();
        if let Some(last) = ledger.audit.last() {
            if last.new_score != ledger.score().value() {
                return Err(corrupt(format!(
                    "audit trail ends at score {}, entries give {}",
                    last.new_score,
                    ledger.score().value()
                )));
            }
        }
        Ok(ledger)
    }
}

/// Exclusive advisory lock on a ledger file.
///
/// Backed by flock(2) on `<ledger>.lock`; any second writer — another
/// process or another handle in this one — gets a busy error instead of
/// blocking. Dropping the guard releases the lock.
pub struct LedgerLock {
    file: std::fs::File,
    ledger_path: PathBuf,
}

fn lock_path_of(ledger_path: &Path) -> PathBuf {
    let mut name = ledger_path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_else(|| "ledger".into());
    name.push(".lock");
    ledger_path.with_file_name(name)
}

impl LedgerLock {
    pub fn acquire(ledger_path: &Path) -> Result<Self, CredibilityError> {
        let lock_path = lock_path_of(ledger_path);
        // Only the flock matters; the lock file's contents are never read.
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&lock_path)
            .map_err(|e| CredibilityError::Io {
                path: lock_path.display().to_string(),
                source: e,
            })?;
        let rc = unsafe { libc::flock(file.as_raw_fd(), libc::LOCK_EX | libc::LOCK_NB) };
        if rc != 0 {
            return Err(CredibilityError::Busy(
                ledger_path.display().to_string(),
            ));
        }
        Ok(Self {
            file,
            ledger_path: ledger_path.to_path_buf(),
        })
    }
}

impl Drop for LedgerLock {
    fn drop(&mut self) {
        unsafe {
            libc::flock(self.file.as_raw_fd(), libc::LOCK_UN);
        }
    }
}
