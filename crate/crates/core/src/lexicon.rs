//! Lexicon files.
//!
//! ```text
//! # comment
//! @goal s q
//! fred := np | s/(s\np)
//! sent := s\np/pp
//! ```
//!
//! Repeated word lines merge. Without an `@goal` line the goals are `s` and
//! `q`. Each entry's semantics is the constant named after the word.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::category::{Category, CategoryParseError};
use crate::derivation::{leaf_with_sem, Derivation};
use crate::sem::SemTerm;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LexEntry {
    pub cat: Category,
    pub sem: SemTerm,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<String, Vec<LexEntry>>,
    goals: BTreeSet<Category>,
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: {source}")]
    BadCategory {
        line: usize,
        #[source]
        source: CategoryParseError,
    },
    #[error("lexicon has no entries")]
    Empty,
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub fn default_goals() -> BTreeSet<Category> {
    [Category::atom("s"), Category::atom("q")].into_iter().collect()
}

impl Lexicon {
    pub fn new() -> Lexicon {
        Lexicon {
            entries: BTreeMap::new(),
            goals: default_goals(),
        }
    }

    /// Adds an entry unless the word already has that category.
    pub fn add(&mut self, word: &str, cat: Category) {
        let entries = self.entries.entry(word.to_string()).or_default();
        if !entries.iter().any(|e| e.cat == cat) {
            entries.push(LexEntry {
                cat,
                sem: SemTerm::constant(word),
            });
        }
    }

    pub fn set_goals(&mut self, goals: impl IntoIterator<Item = Category>) {
        self.goals = goals.into_iter().collect();
    }

    pub fn goals(&self) -> &BTreeSet<Category> {
        &self.goals
    }

    pub fn entries(&self, word: &str) -> Option<&[LexEntry]> {
        self.entries.get(word).map(|v| v.as_slice())
    }

    /// Leaf derivations for every reading of `word`.
    pub fn leaves(&self, word: &str) -> Option<Vec<Derivation>> {
        self.entries(word)
            .map(|es| es.iter().map(|e| leaf_with_sem(word, e.cat.clone(), e.sem.clone())).collect())
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn parse(text: &str) -> Result<Lexicon, LexiconError> {
        let mut lex = Lexicon::new();
        let mut goals: Option<BTreeSet<Category>> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("@goal") {
                let set = goals.get_or_insert_with(BTreeSet::new);
                for tok in rest.split_whitespace() {
                    let c = tok
                        .parse()
                        .map_err(|source| LexiconError::BadCategory { line: line_no, source })?;
                    set.insert(c);
                }
                continue;
            }
            let (word, cats) = line.split_once(":=").ok_or_else(|| LexiconError::Malformed {
                line: line_no,
                msg: "expected `word := category ( | category )*`".into(),
            })?;
            let word = word.trim();
            if word.is_empty() || word.contains(char::is_whitespace) {
                return Err(LexiconError::Malformed {
                    line: line_no,
                    msg: format!("bad word {:?}", word),
                });
            }
            for alt in cats.split('|') {
                let c = alt
                    .trim()
                    .parse()
                    .map_err(|source| LexiconError::BadCategory { line: line_no, source })?;
                lex.add(word, c);
            }
        }
        if lex.is_empty() {
            return Err(LexiconError::Empty);
        }
        if let Some(goals) = goals {
            lex.goals = goals;
        }
        Ok(lex)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Lexicon, LexiconError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Lexicon::parse(&text)
    }
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon::new()
    }
}

/// Canonical file form; `Lexicon::parse` reads it back unchanged.
impl fmt::Display for Lexicon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@goal")?;
        for g in &self.goals {
            write!(f, " {}", g)?;
        }
        writeln!(f)?;
        for (word, entries) in &self.entries {
            let cats: Vec<String> = entries.iter().map(|e| e.cat.to_string()).collect();
            writeln!(f, "{} := {}", word, cats.join(" | "))?;
        }
        Ok(())
    }
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Lexicon, LexiconError> {
    Lexicon::load(path)
}

/// Reads a corpus: one sentence per line, whitespace-tokenized. Blank lines
/// and `#` comments are skipped.
pub fn parse_corpus(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect()
}
