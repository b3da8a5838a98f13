//! The incremental parser: parallel analyses, each a sequence of derivations
//! whose frontiers spell the words consumed so far.
//!
//! Per word the parser scans, filters by viability, closes under
//! combination of the two rightmost constituents, and in eager mode keeps
//! only analyses where no such combination is possible. With reveal enabled
//! a leftward-looking modifier that could not combine directly is attached
//! inside the previous constituent after rewriting it to right-branching
//! form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::category::{Category, Slash};
use crate::derivation::{make_node, Derivation};
use crate::lexicon::Lexicon;
use crate::rewrite::{normalize, RewriteStrategy};
use crate::rules::{enumerate_combinations, infer_rule, Direction, RuleConfig, RuleUse};
use crate::sem::{saturate_reduce, sem_of_combination, SemError, SemTerm};
use crate::viability::ViabilityModel;

/// A sequence of derivations covering the consumed prefix, left to right.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Analysis {
    pub constituents: Vec<Derivation>,
}

impl Analysis {
    pub fn new(constituents: Vec<Derivation>) -> Analysis {
        assert!(!constituents.is_empty(), "an analysis has at least one constituent");
        Analysis { constituents }
    }

    pub fn len(&self) -> usize {
        self.constituents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constituents.is_empty()
    }

    pub fn rightmost(&self) -> &Derivation {
        self.constituents.last().expect("non-empty")
    }

    pub fn categories(&self) -> Vec<Category> {
        self.constituents.iter().map(|d| d.cat().clone()).collect()
    }

    pub fn category_strings(&self) -> Vec<String> {
        self.constituents.iter().map(|d| d.cat().to_string()).collect()
    }

    pub fn words(&self) -> Vec<String> {
        self.constituents.iter().flat_map(|d| d.words()).collect()
    }

    /// Word offset of each constituent.
    pub fn starts(&self) -> Vec<usize> {
        let mut at = 0;
        self.constituents
            .iter()
            .map(|d| {
                let s = at;
                at += d.leaf_count();
                s
            })
            .collect()
    }

    fn with_rightmost_pair(&self, combined: Derivation) -> Analysis {
        let mut cs = self.constituents[..self.len() - 2].to_vec();
        cs.push(combined);
        Analysis::new(cs)
    }

    fn appended(&self, d: Derivation) -> Analysis {
        let mut cs = self.constituents.clone();
        cs.push(d);
        Analysis::new(cs)
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.category_strings().join(", "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    Scanned,
    Combined,
    Revealed,
    Attached,
    DiscardedViability,
    DiscardedEager,
    RefusedNonendocentric,
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TraceKind::Scanned => "scanned",
            TraceKind::Combined => "combined",
            TraceKind::Revealed => "revealed",
            TraceKind::Attached => "attached",
            TraceKind::DiscardedViability => "discarded_viability",
            TraceKind::DiscardedEager => "discarded_eager",
            TraceKind::RefusedNonendocentric => "refused_nonendocentric",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub kind: TraceKind,
    pub word_index: usize,
    /// Constituent categories of the analysis the event concerns.
    pub categories: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl TraceEvent {
    fn new(kind: TraceKind, word_index: usize, a: &Analysis) -> TraceEvent {
        TraceEvent {
            kind,
            word_index,
            categories: a.category_strings(),
            detail: None,
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> TraceEvent {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseMode {
    /// Keep every analysis.
    #[default]
    Exhaustive,
    /// Combine whenever possible; drop analyses that skip a combination.
    Eager,
}

impl FromStr for ParseMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exhaustive" => Ok(ParseMode::Exhaustive),
            "eager" => Ok(ParseMode::Eager),
            other => Err(format!("unknown policy {:?}; use exhaustive or eager", other)),
        }
    }
}

impl fmt::Display for ParseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseMode::Exhaustive => "exhaustive",
            ParseMode::Eager => "eager",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ParsePolicy {
    pub mode: ParseMode,
    pub reveal: bool,
    /// Only `X\X` categories may attach at revealed sites.
    pub endocentric_only: bool,
    pub viability: Option<ViabilityModel>,
    pub rules: RuleConfig,
    /// Overrides the lexicon's goal categories.
    pub goals: Option<BTreeSet<Category>>,
}

impl ParsePolicy {
    pub fn exhaustive() -> ParsePolicy {
        ParsePolicy {
            mode: ParseMode::Exhaustive,
            reveal: false,
            endocentric_only: true,
            viability: None,
            rules: RuleConfig::default(),
            goals: None,
        }
    }

    pub fn eager() -> ParsePolicy {
        ParsePolicy {
            mode: ParseMode::Eager,
            ..ParsePolicy::exhaustive()
        }
    }

    pub fn eager_with_reveal() -> ParsePolicy {
        ParsePolicy {
            reveal: true,
            ..ParsePolicy::eager()
        }
    }

    pub fn with_viability(mut self, model: ViabilityModel) -> ParsePolicy {
        self.viability = Some(model);
        self
    }

    pub fn with_rules(mut self, rules: RuleConfig) -> ParsePolicy {
        self.rules = rules;
        self
    }

    pub fn validate(&self) -> Result<(), ParseError> {
        if self.reveal && self.mode != ParseMode::Eager {
            return Err(ParseError::Policy("reveal requires the eager policy".into()));
        }
        Ok(())
    }
}

impl Default for ParsePolicy {
    fn default() -> Self {
        ParsePolicy::exhaustive()
    }
}

#[derive(Clone, Debug, Default)]
pub struct ParserState {
    analyses: BTreeSet<Analysis>,
    pub consumed: Vec<String>,
    pub trace: Vec<TraceEvent>,
}

impl ParserState {
    pub fn new() -> ParserState {
        ParserState::default()
    }

    /// Analyses in canonical order.
    pub fn analyses(&self) -> impl Iterator<Item = &Analysis> {
        self.analyses.iter()
    }

    pub fn analysis_count(&self) -> usize {
        self.analyses.len()
    }

    pub fn snapshot(&self) -> Vec<Analysis> {
        self.analyses.iter().cloned().collect()
    }

    fn word_index(&self) -> usize {
        self.consumed.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unknown word {word:?} at position {index}")]
    UnknownWord { word: String, index: usize },
    #[error("stuck at word {index} ({word:?}): no analysis survives")]
    Stuck {
        index: usize,
        word: String,
        trace: Vec<TraceEvent>,
    },
    #[error("empty input")]
    EmptyInput,
    #[error("invalid policy: {0}")]
    Policy(String),
}

pub fn scan(state: ParserState, word: &str, lex: &Lexicon) -> Result<ParserState, ParseError> {
    let index = state.consumed.len();
    let leaves = lex.leaves(word).ok_or_else(|| ParseError::UnknownWord {
        word: word.to_string(),
        index,
    })?;
    let mut next = ParserState {
        analyses: BTreeSet::new(),
        consumed: state.consumed,
        trace: state.trace,
    };
    next.consumed.push(word.to_string());
    for l in &leaves {
        if index == 0 {
            next.analyses.insert(Analysis::new(vec![l.clone()]));
        }
        for a in &state.analyses {
            next.analyses.insert(a.appended(l.clone()));
        }
    }
    for a in &next.analyses {
        next.trace.push(TraceEvent::new(TraceKind::Scanned, index, a).with_detail(word));
    }
    Ok(next)
}

/// Every way to combine the two rightmost constituents.
fn rightmost_combinations(a: &Analysis, rules: &RuleConfig) -> Vec<(RuleUse, Analysis)> {
    if a.len() < 2 {
        return Vec::new();
    }
    let l = &a.constituents[a.len() - 2];
    let r = &a.constituents[a.len() - 1];
    enumerate_combinations(l.cat(), r.cat(), rules)
        .into_iter()
        .map(|(rule, _)| {
            let d = make_node(rule, l.clone(), r.clone()).expect("enumerated rules apply");
            (rule, a.with_rightmost_pair(d))
        })
        .collect()
}

fn can_combine_rightmost(a: &Analysis, rules: &RuleConfig) -> bool {
    a.len() >= 2
        && !enumerate_combinations(a.constituents[a.len() - 2].cat(), a.rightmost().cat(), rules).is_empty()
}

/// Adds every combination of rightmost pairs until nothing new appears.
/// In eager mode, then drops every analysis whose rightmost pair combines.
pub fn combine_closure(state: ParserState, policy: &ParsePolicy) -> ParserState {
    let ParserState {
        mut analyses,
        consumed,
        mut trace,
    } = state;
    let index = consumed.len().saturating_sub(1);
    let mut work: Vec<Analysis> = analyses.iter().cloned().collect();
    while let Some(a) = work.pop() {
        for (rule, b) in rightmost_combinations(&a, &policy.rules) {
            if analyses.insert(b.clone()) {
                trace.push(TraceEvent::new(TraceKind::Combined, index, &b).with_detail(rule.to_string()));
                work.push(b);
            }
        }
    }
    if policy.mode == ParseMode::Eager {
        analyses.retain(|a| {
            let keep = !can_combine_rightmost(a, &policy.rules);
            if !keep {
                trace.push(TraceEvent::new(TraceKind::DiscardedEager, index, a));
            }
            keep
        });
    }
    ParserState {
        analyses,
        consumed,
        trace,
    }
}

/// Outcome of trying to attach the rightmost constituent inside its
/// neighbour.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reveal {
    /// One analysis per attachment site, highest site first.
    Attached(Vec<Analysis>),
    /// The modifier is not of shape `X\X`.
    Refused,
    /// No site of the right category, or the rewrite was obstructed.
    NoSite,
}

/// Normalizes the next-to-rightmost constituent and adjoins the rightmost
/// one, a `X\X` modifier, at every right-frontier node of category `X`.
pub fn reveal_attach(a: &Analysis, policy: &ParsePolicy) -> Reveal {
    assert!(a.len() >= 2, "reveal needs two constituents");
    let modifier = a.rightmost();
    let host = &a.constituents[a.len() - 2];
    let target = match modifier.cat().endocentric_target() {
        Some(x) => x.clone(),
        None if policy.endocentric_only => return Reveal::Refused,
        None => match modifier.cat().as_functor() {
            Some((_, Slash::Backward, y)) => y.clone(),
            _ => return Reveal::NoSite,
        },
    };
    let Ok(report) = normalize(host, RewriteStrategy::RootFirst, &policy.rules) else {
        return Reveal::NoSite;
    };
    let nf = report.normal_form;
    let mut out = Vec::new();
    for (pos, c) in nf.right_frontier() {
        if c != target {
            continue;
        }
        let site = nf.at(&pos).expect("frontier position exists").clone();
        let Some(m) = infer_rule(site.cat(), modifier.cat(), Direction::Backward) else {
            continue;
        };
        if !policy.rules.permits(&m) {
            continue;
        }
        let Ok(adjoined) = make_node(m.rule, site, modifier.clone()) else {
            continue;
        };
        if let Ok(rebuilt) = nf.replace_at(&pos, adjoined) {
            out.push(a.with_rightmost_pair(rebuilt));
        }
    }
    if out.is_empty() {
        Reveal::NoSite
    } else {
        Reveal::Attached(out)
    }
}

fn leftward_looking(d: &Derivation) -> bool {
    d.cat().outer_slash() == Some(Slash::Backward)
}

/// Runs reveal on analyses whose rightmost constituent is leftward-looking
/// and stranded, closing again after each round of attachments.
fn reveal_round(state: ParserState, policy: &ParsePolicy) -> ParserState {
    let mut state = state;
    let mut tried: BTreeSet<Analysis> = BTreeSet::new();
    loop {
        let index = state.word_index();
        let mut next = BTreeSet::new();
        let mut changed = false;
        for a in std::mem::take(&mut state.analyses) {
            if a.len() < 2 || !leftward_looking(a.rightmost()) || !tried.insert(a.clone()) {
                next.insert(a);
                continue;
            }
            match reveal_attach(&a, policy) {
                Reveal::Attached(results) => {
                    state
                        .trace
                        .push(TraceEvent::new(TraceKind::Revealed, index, &a).with_detail(format!("{} site(s)", results.len())));
                    for r in results {
                        state.trace.push(TraceEvent::new(TraceKind::Attached, index, &r));
                        next.insert(r);
                    }
                    changed = true;
                }
                Reveal::Refused => {
                    state.trace.push(
                        TraceEvent::new(TraceKind::RefusedNonendocentric, index, &a)
                            .with_detail(a.rightmost().cat().to_string()),
                    );
                    next.insert(a);
                }
                Reveal::NoSite => {
                    next.insert(a);
                }
            }
        }
        state.analyses = next;
        if !changed {
            return state;
        }
        state = combine_closure(state, policy);
    }
}

/// Everything a parse produced.
#[derive(Clone, Debug)]
pub struct ParseResult {
    pub words: Vec<String>,
    /// Surviving analyses after each word.
    pub snapshots: Vec<Vec<Analysis>>,
    pub analyses: Vec<Analysis>,
    /// Single-constituent analyses whose category is a goal.
    pub complete: Vec<Derivation>,
    pub trace: Vec<TraceEvent>,
}

impl ParseResult {
    /// Single-constituent final analyses of any category.
    pub fn spanning(&self) -> Vec<Derivation> {
        self.analyses
            .iter()
            .filter(|a| a.len() == 1)
            .map(|a| a.constituents[0].clone())
            .collect()
    }

    pub fn events(&self, kind: TraceKind) -> impl Iterator<Item = &TraceEvent> {
        self.trace.iter().filter(move |e| e.kind == kind)
    }
}

pub fn parse<S: AsRef<str>>(words: &[S], lex: &Lexicon, policy: &ParsePolicy) -> Result<ParseResult, ParseError> {
    policy.validate()?;
    if words.is_empty() {
        return Err(ParseError::EmptyInput);
    }
    let goals = policy.goals.as_ref().unwrap_or_else(|| lex.goals());
    let mut state = ParserState::new();
    let mut snapshots = Vec::with_capacity(words.len());
    for (i, w) in words.iter().enumerate() {
        let w = w.as_ref();
        state = scan(state, w, lex)?;
        if let Some(m) = &policy.viability {
            state = crate::viability::filter_state(state, m);
        }
        state = combine_closure(state, policy);
        if policy.reveal {
            state = reveal_round(state, policy);
        }
        if state.analyses.is_empty() {
            let tail = state.trace.len().saturating_sub(20);
            return Err(ParseError::Stuck {
                index: i,
                word: w.to_string(),
                trace: state.trace[tail..].to_vec(),
            });
        }
        snapshots.push(state.snapshot());
    }
    let analyses = state.snapshot();
    let complete = analyses
        .iter()
        .filter(|a| a.len() == 1 && goals.contains(a.constituents[0].cat()))
        .map(|a| a.constituents[0].clone())
        .collect();
    Ok(ParseResult {
        words: state.consumed,
        snapshots,
        analyses,
        complete,
        trace: state.trace,
    })
}

impl ParserState {
    pub(crate) fn from_parts(analyses: BTreeSet<Analysis>, consumed: Vec<String>, trace: Vec<TraceEvent>) -> ParserState {
        ParserState {
            analyses,
            consumed,
            trace,
        }
    }

    pub(crate) fn into_parts(self) -> (BTreeSet<Analysis>, Vec<String>, Vec<TraceEvent>) {
        (self.analyses, self.consumed, self.trace)
    }
}

/// Applicative commitments: how often leaf `f` takes something headed by
/// leaf `a` as an argument, after eliminating composition.
pub type Commitments = BTreeMap<(usize, usize), usize>;

/// The derivation's semantics with each leaf's constant replaced by its
/// absolute word index.
pub fn indexed_sem(d: &Derivation, offset: usize) -> SemTerm {
    match d.as_node() {
        None => SemTerm::constant(&offset.to_string()),
        Some(n) => {
            let l = indexed_sem(&n.left, offset);
            let r = indexed_sem(&n.right, offset + n.left.leaf_count());
            match n.rule.direction {
                Direction::Forward => sem_of_combination(n.rule, l, r),
                Direction::Backward => sem_of_combination(n.rule, r, l),
            }
        }
    }
}

fn head_index(t: &SemTerm) -> Option<usize> {
    match t.spine().0 {
        SemTerm::Const(id) => id.parse().ok(),
        _ => None,
    }
}

fn collect_commitments(t: &SemTerm, out: &mut Commitments) {
    let (head, args) = t.spine();
    let h = match head {
        SemTerm::Const(id) => id.parse().ok(),
        _ => None,
    };
    for a in args {
        if let (Some(h), Some(x)) = (h, head_index(a)) {
            *out.entry((h, x)).or_default() += 1;
        }
        collect_commitments(a, out);
    }
}

fn term_commitments(t: &SemTerm, arity: usize) -> Result<Commitments, SemError> {
    let mut out = Commitments::new();
    collect_commitments(&saturate_reduce(t, arity)?, &mut out);
    Ok(out)
}

/// Commitments of every constituent of an analysis.
pub fn commitments(a: &Analysis) -> Result<Commitments, SemError> {
    let mut out = Commitments::new();
    for (d, start) in a.constituents.iter().zip(a.starts()) {
        for (k, v) in term_commitments(&indexed_sem(d, start), d.cat().arity())? {
            *out.entry(k).or_default() += v;
        }
    }
    Ok(out)
}

/// Removes every application of the constant `id` to an argument.
fn erase_adjunct(t: &SemTerm, id: &str) -> SemTerm {
    match t {
        SemTerm::App(f, x) => {
            if matches!(&**f, SemTerm::Const(c) if &**c == id) {
                return erase_adjunct(x, id);
            }
            SemTerm::app(erase_adjunct(f, id), erase_adjunct(x, id))
        }
        SemTerm::Comp(n, f, g) => SemTerm::comp(*n, erase_adjunct(f, id), erase_adjunct(g, id)),
        other => other.clone(),
    }
}

/// Checks that attaching the rightmost constituent of `before` produced
/// `after` monotonically: with the adjunct erased, `after` makes exactly
/// the commitments of `before`, and the adjunct itself takes one argument.
pub fn attachment_is_monotone(before: &Analysis, after: &Analysis) -> Result<bool, SemError> {
    if after.len() + 1 != before.len() {
        return Ok(false);
    }
    let modifier_start = *before.starts().last().expect("non-empty");
    if before.rightmost().leaf_count() != 1 {
        // only lexical modifiers have a single constant to erase
        return Ok(false);
    }
    let id = modifier_start.to_string();
    let host_start = before.starts()[before.len() - 2];
    let host = &before.constituents[before.len() - 2];
    let joined = after.rightmost();
    let arity = joined.cat().arity();
    let full = indexed_sem(joined, host_start);
    let erased = erase_adjunct(&full, &id);
    let kept = term_commitments(&erased, arity)? == term_commitments(&indexed_sem(host, host_start), arity)?;
    let mut extended = Commitments::new();
    collect_commitments(&saturate_reduce(&full, arity)?, &mut extended);
    let adjoined = extended.keys().any(|(f, _)| *f == modifier_start);
    let prefix_same = before.constituents[..before.len() - 2] == after.constituents[..after.len() - 1];
    Ok(kept && adjoined && prefix_same)
}
