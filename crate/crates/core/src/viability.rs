//! A learned filter on analyses: category sequences at the right edge of an
//! analysis that have repeatedly failed and never succeeded are discarded.
//!
//! The model file is a plain table:
//!
//! ```text
//! # k=2 threshold=3
//! np/n  s\np/np  5  0
//! np/n  n       0  12
//! ```
//!
//! Each line holds the signature's categories, then failure and success
//! counts, all tab-separated.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::category::Category;
use crate::derivation::Derivation;
use crate::lexicon::Lexicon;
use crate::parser::{parse, Analysis, ParseError, ParsePolicy, ParserState, TraceEvent, TraceKind};
use crate::rules::RuleConfig;

pub const DEFAULT_K: usize = 2;
pub const DEFAULT_THRESHOLD: u64 = 3;

/// The categories of the last `k` constituents, in printed form.
pub type Signature = Vec<String>;

pub fn signature(a: &Analysis, k: usize) -> Signature {
    let cs = a.category_strings();
    let from = cs.len().saturating_sub(k);
    cs[from..].to_vec()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub failures: u64,
    pub successes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViabilityModel {
    counts: BTreeMap<Signature, Counts>,
    pub k: usize,
    pub threshold: u64,
}

#[derive(Debug, Error)]
pub enum ViabilityError {
    #[error("model line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ViabilityModel {
    pub fn new(k: usize, threshold: u64) -> ViabilityModel {
        assert!(k >= 1, "signatures need at least one category");
        ViabilityModel {
            counts: BTreeMap::new(),
            k,
            threshold,
        }
    }

    pub fn counts(&self, sig: &[String]) -> Counts {
        self.counts.get(sig).copied().unwrap_or_default()
    }

    pub fn signatures(&self) -> impl Iterator<Item = (&Signature, &Counts)> {
        self.counts.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Records one outcome for the last `k` of `cats`.
    pub fn record(&mut self, cats: &[Category], success: bool) {
        let from = cats.len().saturating_sub(self.k);
        let sig: Signature = cats[from..].iter().map(|c| c.to_string()).collect();
        self.record_signature(sig, success);
    }

    fn record_signature(&mut self, sig: Signature, success: bool) {
        let c = self.counts.entry(sig).or_default();
        if success {
            c.successes += 1;
        } else {
            c.failures += 1;
        }
    }

    pub fn is_viable_signature(&self, sig: &[String]) -> bool {
        let c = self.counts(sig);
        !(c.failures >= self.threshold && c.successes == 0)
    }

    pub fn is_viable(&self, a: &Analysis) -> bool {
        self.is_viable_signature(&signature(a, self.k))
    }

    /// Adds another model's counts to this one.
    pub fn absorb(&mut self, other: &ViabilityModel) {
        for (sig, c) in &other.counts {
            let e = self.counts.entry(sig.clone()).or_default();
            e.failures += c.failures;
            e.successes += c.successes;
        }
    }

    pub fn from_text(text: &str) -> Result<ViabilityModel, ViabilityError> {
        let mut model = ViabilityModel::new(DEFAULT_K, DEFAULT_THRESHOLD);
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if let Some(header) = line.strip_prefix('#') {
                for field in header.split_whitespace() {
                    let bad = || ViabilityError::Malformed {
                        line: line_no,
                        msg: format!("bad header field {:?}", field),
                    };
                    match field.split_once('=') {
                        Some(("k", v)) => model.k = v.parse().ok().filter(|k| *k >= 1).ok_or_else(bad)?,
                        Some(("threshold", v)) => model.threshold = v.parse().map_err(|_| bad())?,
                        _ => {}
                    }
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 3 {
                return Err(ViabilityError::Malformed {
                    line: line_no,
                    msg: "expected categories, failures and successes".into(),
                });
            }
            let n = fields.len();
            let num = |s: &str| {
                s.trim().parse::<u64>().map_err(|_| ViabilityError::Malformed {
                    line: line_no,
                    msg: format!("bad count {:?}", s),
                })
            };
            let counts = Counts {
                failures: num(fields[n - 2])?,
                successes: num(fields[n - 1])?,
            };
            let mut sig = Signature::new();
            for c in &fields[..n - 2] {
                let parsed: Category = c.parse().map_err(|e| ViabilityError::Malformed {
                    line: line_no,
                    msg: format!("{}", e),
                })?;
                sig.push(parsed.to_string());
            }
            model.counts.insert(sig, counts);
        }
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ViabilityModel, ViabilityError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ViabilityError::Io {
            path: path.display().to_string(),
            source,
        })?;
        ViabilityModel::from_text(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ViabilityError> {
        let path = path.as_ref();
        fs::write(path, self.to_string()).map_err(|source| ViabilityError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

impl Default for ViabilityModel {
    fn default() -> Self {
        ViabilityModel::new(DEFAULT_K, DEFAULT_THRESHOLD)
    }
}

impl fmt::Display for ViabilityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# k={} threshold={}", self.k, self.threshold)?;
        for (sig, c) in &self.counts {
            writeln!(f, "{}\t{}\t{}", sig.join("\t"), c.failures, c.successes)?;
        }
        Ok(())
    }
}

/// Drops non-viable analyses, recording each drop in the trace.
pub fn filter_state(state: ParserState, m: &ViabilityModel) -> ParserState {
    let (analyses, consumed, mut trace) = state.into_parts();
    let index = consumed.len().saturating_sub(1);
    let mut kept = BTreeSet::new();
    for a in analyses {
        if m.is_viable(&a) {
            kept.insert(a);
        } else {
            trace.push(TraceEvent {
                kind: TraceKind::DiscardedViability,
                word_index: index,
                categories: a.category_strings(),
                detail: Some(signature(&a, m.k).join(" ")),
            });
        }
    }
    ParserState::from_parts(kept, consumed, trace)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("no complete derivation")]
    NoParse,
}

/// Every analysis the exhaustive parser holds after each word, labelled by
/// whether some complete derivation of the sentence extends it.
pub fn label_sentence<S: AsRef<str>>(
    words: &[S],
    lex: &Lexicon,
    rules: &RuleConfig,
) -> Result<Vec<(Analysis, bool)>, LabelError> {
    let policy = ParsePolicy::exhaustive().with_rules(rules.clone());
    let result = parse(words, lex, &policy)?;
    if result.complete.is_empty() {
        return Err(LabelError::NoParse);
    }
    // an analysis extends to a derivation iff each constituent is the
    // derivation's subtree over the same span
    let subtrees: Vec<HashSet<(usize, Derivation)>> = result.complete.iter().map(spans).collect();
    let mut out = Vec::new();
    for snap in &result.snapshots {
        for a in snap {
            let keyed: Vec<(usize, Derivation)> = a.starts().into_iter().zip(a.constituents.iter().cloned()).collect();
            let success = subtrees.iter().any(|set| keyed.iter().all(|k| set.contains(k)));
            out.push((a.clone(), success));
        }
    }
    Ok(out)
}

fn spans(d: &Derivation) -> HashSet<(usize, Derivation)> {
    let mut out = HashSet::new();
    fn walk(d: &Derivation, start: usize, out: &mut HashSet<(usize, Derivation)>) {
        out.insert((start, d.clone()));
        if let Some(n) = d.as_node() {
            walk(&n.left, start, out);
            walk(&n.right, start + n.left.leaf_count(), out);
        }
    }
    walk(d, 0, &mut out);
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrainReport {
    pub sentences: usize,
    pub labelled: usize,
    /// Sentence index and reason for every sentence that was skipped.
    pub skipped: Vec<(usize, String)>,
}

pub fn train<S: AsRef<str>>(
    corpus: &[Vec<S>],
    lex: &Lexicon,
    model: ViabilityModel,
    rules: &RuleConfig,
) -> (ViabilityModel, TrainReport) {
    let mut model = model;
    let mut report = TrainReport::default();
    for (i, sentence) in corpus.iter().enumerate() {
        report.sentences += 1;
        match label_sentence(sentence, lex, rules) {
            Ok(labels) => {
                for (a, success) in labels {
                    model.record_signature(signature(&a, model.k), success);
                    report.labelled += 1;
                }
            }
            Err(e) => report.skipped.push((i, e.to_string())),
        }
    }
    (model, report)
}
