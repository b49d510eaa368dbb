//! Descriptive corpus analyses: headline length statistics, lexicon-based
//! sentiment, and verb-form distribution.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use serde::Serialize;

use crate::corpus::{lemmatize, normalize, tokenize, Corpus, HeadlineKind};

#[derive(Debug, thiserror::Error)]
pub enum AnalyticsError {
    #[error("no headlines of kind {0} in the corpus")]
    EmptySelection(HeadlineKind),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("valence lexicon line {line}: {reason}")]
    MalformedLexicon { line: usize, reason: String },
}

/// Headline length distribution in words.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    /// Population standard deviation (divisor n, not n-1).
    pub std_dev: f64,
}

/// Mean, median, and population std of token counts over headlines of `filter`.
pub fn length_stats(corpus: &Corpus, filter: HeadlineKind) -> Result<LengthStats, AnalyticsError> {
    let mut lengths: Vec<usize> = corpus
        .of_kind(filter)
        .map(|h| tokenize(&normalize(&h.text)).len())
        .collect();
    if lengths.is_empty() {
        return Err(AnalyticsError::EmptySelection(filter));
    }
    lengths.sort_unstable();
    let n = lengths.len();
    let sum: usize = lengths.iter().sum();
    let mean = sum as f64 / n as f64;
    let median = if n % 2 == 1 {
        lengths[n / 2] as f64
    } else {
        (lengths[n / 2 - 1] + lengths[n / 2]) as f64 / 2.0
    };
    let var = lengths
        .iter()
        .map(|&l| {
            let d = l as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n as f64;
    Ok(LengthStats {
        n,
        mean,
        median,
        std_dev: var.sqrt(),
    })
}

/// Saturation constant of the compound-score normalization S/sqrt(S*S + ALPHA).
const ALPHA: f64 = 15.0;

/// Word valence table. File values live in [-4, 4] and are rescaled to
/// [-1, 1] on load.
#[derive(Debug, Clone)]
pub struct ValenceLexicon {
    id: String,
    valences: BTreeMap<String, f64>,
}

impl ValenceLexicon {
    /// Build from already-rescaled valences in [-1, 1].
    pub fn from_scaled_pairs<I, S>(id: &str, pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        let valences = pairs
            .into_iter()
            .map(|(w, v)| (w.as_ref().to_lowercase(), v))
            .collect();
        Self {
            id: id.to_string(),
            valences,
        }
    }

    /// Parse the TSV `word<TAB>valence` format, valence in [-4, 4].
    pub fn read<R: BufRead>(id: &str, reader: R) -> Result<Self, AnalyticsError> {
        let mut valences = BTreeMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| AnalyticsError::MalformedLexicon {
                line: line_no,
                reason: e.to_string(),
            })?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (word, value) =
                trimmed
                    .split_once('\t')
                    .ok_or_else(|| AnalyticsError::MalformedLexicon {
                        line: line_no,
                        reason: "expected word<TAB>valence".to_string(),
                    })?;
            let raw: f64 = value
                .trim()
                .parse()
                .map_err(|e| AnalyticsError::MalformedLexicon {
                    line: line_no,
                    reason: format!("bad valence: {e}"),
                })?;
            if !(-4.0..=4.0).contains(&raw) {
                return Err(AnalyticsError::MalformedLexicon {
                    line: line_no,
                    reason: format!("valence {raw} outside [-4, 4]"),
                });
            }
            valences.insert(word.trim().to_lowercase(), raw / 4.0);
        }
        Ok(Self {
            id: id.to_string(),
            valences,
        })
    }

    /// The lexicon shipped with the crate.
    pub fn builtin() -> Self {
        static BUILTIN: &str = include_str!("../data/valence_lexicon.tsv");
        Self::read("builtin-v1", BUILTIN.as_bytes()).expect("bundled lexicon parses")
    }

    pub fn load(path: &Path) -> Result<Self, AnalyticsError> {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "lexicon".to_string());
        let file = std::fs::File::open(path).map_err(|e| AnalyticsError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::read(&id, std::io::BufReader::new(file))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Valence of a token: exact lookup first, then its lemma, else 0.
    pub fn valence(&self, token: &str) -> f64 {
        if let Some(v) = self.valences.get(token) {
            return *v;
        }
        self.valences
            .get(&lemmatize(token))
            .copied()
            .unwrap_or(0.0)
    }

    /// Compound sentiment of one headline: the valence sum S squashed to
    /// (-1, 1) by S/sqrt(S*S + 15). Monotone in every token valence.
    pub fn headline_score(&self, text: &str) -> f64 {
        let s: f64 = tokenize(&normalize(text))
            .iter()
            .map(|t| self.valence(t))
            .sum();
        s / (s * s + ALPHA).sqrt()
    }
}

/// Per-source mean compound sentiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentimentReport {
    pub lexicon_id: String,
    pub per_source_mean: BTreeMap<String, f64>,
}

/// Mean headline sentiment grouped by source, over the whole corpus.
pub fn sentiment_mean(corpus: &Corpus, lexicon: &ValenceLexicon) -> SentimentReport {
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for h in corpus.headlines() {
        let entry = sums.entry(h.source.clone()).or_insert((0.0, 0));
        entry.0 += lexicon.headline_score(&h.text);
        entry.1 += 1;
    }
    SentimentReport {
        lexicon_id: lexicon.id().to_string(),
        per_source_mean: sums
            .into_iter()
            .map(|(src, (sum, n))| (src, sum / n as f64))
            .collect(),
    }
}

/// Mean sentiment over all headlines of one kind; None when there are none.
pub fn sentiment_mean_of_kind(
    corpus: &Corpus,
    lexicon: &ValenceLexicon,
    kind: HeadlineKind,
) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for h in corpus.of_kind(kind) {
        sum += lexicon.headline_score(&h.text);
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

/// Verb-form tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum VerbTag {
    /// Base form (infinitive or after a modal/"to").
    VB,
    /// Simple past.
    VBD,
    /// Gerund / present participle.
    VBG,
    /// Past participle.
    VBN,
    /// Non-3rd-person singular present.
    VBP,
    /// 3rd-person singular present.
    VBZ,
    /// Modal.
    MD,
}

impl std::fmt::Display for VerbTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            VerbTag::VB => "VB",
            VerbTag::VBD => "VBD",
            VerbTag::VBG => "VBG",
            VerbTag::VBN => "VBN",
            VerbTag::VBP => "VBP",
            VerbTag::VBZ => "VBZ",
            VerbTag::MD => "MD",
        };
        write!(f, "{s}")
    }
}

/// Counts of each verb tag over a corpus, per token occurrence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VerbProfile {
    pub counts: BTreeMap<VerbTag, u64>,
}

impl VerbProfile {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

const MODALS: &[&str] = &[
    "can", "could", "may", "might", "must", "shall", "should", "will", "would",
];

const AUXILIARIES: &[&str] = &[
    "am", "are", "be", "been", "being", "had", "has", "have", "is", "was", "were",
];

/// Irregular forms that the suffix rules cannot classify.
/// `Past` means simple-past/past-participle homographs resolved by the
/// preceding-auxiliary rule.
#[derive(Debug, Clone, Copy)]
enum IrregularTag {
    Fixed(VerbTag),
    Past,
}

const IRREGULAR_VERB_TAGS: &[(&str, IrregularTag)] = &[
    ("am", IrregularTag::Fixed(VerbTag::VBP)),
    ("are", IrregularTag::Fixed(VerbTag::VBP)),
    ("been", IrregularTag::Fixed(VerbTag::VBN)),
    ("being", IrregularTag::Fixed(VerbTag::VBG)),
    ("bought", IrregularTag::Past),
    ("broke", IrregularTag::Fixed(VerbTag::VBD)),
    ("broken", IrregularTag::Fixed(VerbTag::VBN)),
    ("brought", IrregularTag::Past),
    ("built", IrregularTag::Past),
    ("came", IrregularTag::Fixed(VerbTag::VBD)),
    ("did", IrregularTag::Fixed(VerbTag::VBD)),
    ("does", IrregularTag::Fixed(VerbTag::VBZ)),
    ("done", IrregularTag::Fixed(VerbTag::VBN)),
    ("gave", IrregularTag::Fixed(VerbTag::VBD)),
    ("given", IrregularTag::Fixed(VerbTag::VBN)),
    ("gone", IrregularTag::Fixed(VerbTag::VBN)),
    ("got", IrregularTag::Past),
    ("gotten", IrregularTag::Fixed(VerbTag::VBN)),
    ("had", IrregularTag::Past),
    ("has", IrregularTag::Fixed(VerbTag::VBZ)),
    ("have", IrregularTag::Fixed(VerbTag::VBP)),
    ("held", IrregularTag::Past),
    ("hid", IrregularTag::Fixed(VerbTag::VBD)),
    ("hidden", IrregularTag::Fixed(VerbTag::VBN)),
    ("is", IrregularTag::Fixed(VerbTag::VBZ)),
    ("kept", IrregularTag::Past),
    ("knew", IrregularTag::Fixed(VerbTag::VBD)),
    ("known", IrregularTag::Fixed(VerbTag::VBN)),
    ("led", IrregularTag::Past),
    ("lost", IrregularTag::Past),
    ("made", IrregularTag::Past),
    ("meant", IrregularTag::Past),
    ("met", IrregularTag::Past),
    ("ran", IrregularTag::Fixed(VerbTag::VBD)),
    ("said", IrregularTag::Past),
    ("sat", IrregularTag::Past),
    ("saw", IrregularTag::Fixed(VerbTag::VBD)),
    ("seen", IrregularTag::Fixed(VerbTag::VBN)),
    ("sent", IrregularTag::Past),
    ("showed", IrregularTag::Fixed(VerbTag::VBD)),
    ("shown", IrregularTag::Fixed(VerbTag::VBN)),
    ("sold", IrregularTag::Past),
    ("spent", IrregularTag::Past),
    ("taken", IrregularTag::Fixed(VerbTag::VBN)),
    ("told", IrregularTag::Past),
    ("took", IrregularTag::Fixed(VerbTag::VBD)),
    ("was", IrregularTag::Fixed(VerbTag::VBD)),
    ("went", IrregularTag::Fixed(VerbTag::VBD)),
    ("were", IrregularTag::Fixed(VerbTag::VBD)),
    ("won", IrregularTag::Past),
    ("wrote", IrregularTag::Fixed(VerbTag::VBD)),
    ("written", IrregularTag::Fixed(VerbTag::VBN)),
];

/// Base verbs common in product-leak headlines; tokens whose lemma is
/// outside this list are never tagged by the suffix rules.
const DEFAULT_VERB_LEXICON: &[&str] = &[
    "add", "allege", "announce", "appear", "arrive", "be", "begin", "benchmark", "boost",
    "break", "bring", "build", "buy", "cancel", "capture", "certify", "change", "claim",
    "come", "confirm", "cost", "cut", "debut", "delay", "describe", "design", "detail",
    "do", "drop", "emerge", "end", "expect", "feature", "file", "follow", "get", "give",
    "go", "happen", "have", "hide", "hint", "hit", "hold", "improve", "include",
    "introduce", "keep", "know", "launch", "leak", "lead", "look", "lose", "make",
    "mean", "meet", "move", "offer", "pack", "patent", "plan", "post", "price",
    "publish", "reach", "register", "release", "rename", "report", "reveal", "roll",
    "run", "say", "see", "sell", "send", "set", "ship", "show", "sit", "spend", "sport",
    "spot", "start", "suggest", "support", "surface", "take", "tease", "tell", "tip",
    "trademark", "unveil", "update", "upgrade", "use", "want", "win", "write",
];

/// Suffix+lexicon verb tagger.
///
/// A token is taggable when it is a modal, an irregular form, or its lemma
/// appears in the verb lexicon; everything else is left untagged. `-ed`
/// forms resolve to VBN after an auxiliary (looking back up to two tokens)
/// and VBD otherwise; base forms to VB after "to" or a modal, else VBP.
#[derive(Debug, Clone)]
pub struct VerbTagger {
    verb_lexicon: BTreeSet<String>,
}

impl Default for VerbTagger {
    fn default() -> Self {
        Self {
            verb_lexicon: DEFAULT_VERB_LEXICON.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl VerbTagger {
    pub fn with_lexicon<I, S>(verbs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            verb_lexicon: verbs
                .into_iter()
                .map(|s| s.as_ref().to_lowercase())
                .collect(),
        }
    }

    fn irregular(token: &str) -> Option<IrregularTag> {
        IRREGULAR_VERB_TAGS
            .binary_search_by_key(&token, |(form, _)| form)
            .ok()
            .map(|i| IRREGULAR_VERB_TAGS[i].1)
    }

    fn aux_precedes(tokens: &[String], i: usize) -> bool {
        tokens[i.saturating_sub(2)..i]
            .iter()
            .any(|t| AUXILIARIES.contains(&t.as_str()))
    }

    /// Tag one normalized token sequence; None entries are untagged tokens.
    pub fn tag_tokens(&self, tokens: &[String]) -> Vec<Option<VerbTag>> {
        let mut tags = Vec::with_capacity(tokens.len());
        for (i, token) in tokens.iter().enumerate() {
            let tag = self.tag_at(tokens, i, token);
            tags.push(tag);
        }
        tags
    }

    fn tag_at(&self, tokens: &[String], i: usize, token: &str) -> Option<VerbTag> {
        if MODALS.contains(&token) {
            return Some(VerbTag::MD);
        }
        if let Some(irregular) = Self::irregular(token) {
            return Some(match irregular {
                IrregularTag::Fixed(tag) => tag,
                IrregularTag::Past => {
                    if Self::aux_precedes(tokens, i) {
                        VerbTag::VBN
                    } else {
                        VerbTag::VBD
                    }
                }
            });
        }
        let lemma = lemmatize(token);
        if !self.verb_lexicon.contains(&lemma) {
            return None;
        }
        if token != lemma {
            if token.ends_with("ing") {
                return Some(VerbTag::VBG);
            }
            if token.ends_with("ed") {
                return Some(if Self::aux_precedes(tokens, i) {
                    VerbTag::VBN
                } else {
                    VerbTag::VBD
                });
            }
            if token.ends_with('s') {
                return Some(VerbTag::VBZ);
            }
            return None;
        }
        let after_to_or_modal = i > 0 && {
            let prev = tokens[i - 1].as_str();
            prev == "to" || MODALS.contains(&prev)
        };
        Some(if after_to_or_modal {
            VerbTag::VB
        } else {
            VerbTag::VBP
        })
    }
}

/// Tag counts over every headline in the corpus.
pub fn verb_profile(corpus: &Corpus, tagger: &VerbTagger) -> VerbProfile {
    profile_headlines(corpus.headlines().iter(), tagger)
}

/// Tag counts over headlines of one kind.
pub fn verb_profile_of_kind(
    corpus: &Corpus,
    tagger: &VerbTagger,
    kind: HeadlineKind,
) -> VerbProfile {
    profile_headlines(corpus.of_kind(kind), tagger)
}

fn profile_headlines<'a, I>(headlines: I, tagger: &VerbTagger) -> VerbProfile
where
    I: Iterator<Item = &'a crate::corpus::Headline>,
{
    let mut profile = VerbProfile::default();
    for h in headlines {
        let tokens = tokenize(&normalize(&h.text));
        for tag in tagger.tag_tokens(&tokens).into_iter().flatten() {
            *profile.counts.entry(tag).or_insert(0) += 1;
        }
    }
    profile
}
