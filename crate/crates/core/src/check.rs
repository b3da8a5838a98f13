//! Invariant suites over generated and exhaustive derivation families.
//!
//! Each suite returns a report with the number of cases examined and any
//! violations found. The rewrite suites run on every tree shape up to a
//! small number of leaves plus a batch of random mixed-direction
//! derivations.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bundled;
use crate::derivation::Derivation;
use crate::gen::{all_shapes, backward_chain, build_on_shape, forward_chain, DerivationGen};
use crate::oracle::{enumerate_sentence, explore_rewrites, explore_rewrites_limited};
use crate::parser::{parse, ParsePolicy};
use crate::rewrite::{contract, find_redexes, normalize, standard_strategies, RewriteReport, RewriteStrategy};
use crate::rules::{Direction, RuleConfig};
use crate::sem::sem_equiv;

const MAX_REPORTED: usize = 10;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub violations: usize,
    /// The first few violations, described.
    pub examples: Vec<String>,
    #[serde(rename = "elapsed_ms", serialize_with = "millis")]
    pub elapsed: Duration,
}

fn millis<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(d.as_millis() as u64)
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.cases > 0
    }
}

struct Tally {
    name: &'static str,
    cases: usize,
    violations: usize,
    examples: Vec<String>,
    start: Instant,
}

impl Tally {
    fn new(name: &'static str) -> Tally {
        Tally {
            name,
            cases: 0,
            violations: 0,
            examples: Vec::new(),
            start: Instant::now(),
        }
    }

    fn case(&mut self) {
        self.cases += 1;
    }

    fn fail(&mut self, msg: impl FnOnce() -> String) {
        self.violations += 1;
        if self.examples.len() < MAX_REPORTED {
            self.examples.push(msg());
        }
    }

    fn expect(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.fail(msg);
        }
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            name: self.name,
            cases: self.cases,
            violations: self.violations,
            examples: self.examples,
            elapsed: self.start.elapsed(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub seed: u64,
    /// Random derivations beyond the exhaustive shapes.
    pub random_cases: usize,
    /// Largest random derivation, in internal nodes.
    pub max_internal: usize,
    /// Every shape with up to this many leaves is checked.
    pub exhaustive_leaves: usize,
    /// Random labellings per exhaustive shape, besides the two chains.
    pub labellings: usize,
    /// Random strategies compared in the confluence suite.
    pub random_strategies: u64,
    /// Largest derivation whose every rewrite sequence is explored.
    pub explore_up_to: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            seed: 0,
            random_cases: 1000,
            max_internal: 12,
            exhaustive_leaves: 6,
            labellings: 3,
            random_strategies: 10,
            explore_up_to: 6,
        }
    }
}

/// Rules with no degree bound, so that no contraction is ever obstructed.
pub fn unbounded_rules() -> RuleConfig {
    RuleConfig::with_max_degree(usize::MAX)
}

/// The derivations the rewrite suites run on: every shape up to
/// `exhaustive_leaves` leaves labelled as a forward chain, a backward chain
/// and with random categories, then `random_cases` random derivations of
/// 1..=`max_internal` internal nodes.
pub fn rewrite_cases(opts: &CheckOptions) -> Vec<Derivation> {
    let mut gen = DerivationGen::new(ChaCha8Rng::seed_from_u64(opts.seed));
    let mut out = Vec::new();
    for leaves in 1..=opts.exhaustive_leaves {
        let fwd = forward_chain(leaves);
        let bwd = backward_chain(leaves);
        for shape in all_shapes(leaves) {
            out.push(build_on_shape(&shape, &fwd, Direction::Forward).expect("chains fit every shape"));
            out.push(build_on_shape(&shape, &bwd, Direction::Backward).expect("chains fit every shape"));
            for _ in 0..opts.labellings {
                out.push(gen.on_shape(&shape));
            }
        }
    }
    let max = opts.max_internal.max(1);
    for i in 0..opts.random_cases {
        out.push(gen.derivation(1 + i % max));
    }
    out
}

fn triangular(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Normalizations of one case under every standard strategy.
fn normalizations(
    d: &Derivation,
    opts: &CheckOptions,
    rules: &RuleConfig,
) -> Vec<(RewriteStrategy, Result<RewriteReport, String>)> {
    standard_strategies(opts.random_strategies)
        .into_iter()
        .map(|s| (s, normalize(d, s, rules).map_err(|e| e.to_string())))
        .collect()
}

/// Every contraction lowers σ by exactly the size of the redex's
/// left-left subtree plus one.
pub fn sigma_descent(cases: &[Derivation], opts: &CheckOptions) -> SuiteReport {
    let rules = unbounded_rules();
    let mut t = Tally::new("sigma-descent");
    for d in cases {
        let mut steps: Vec<(Derivation, crate::derivation::Position)> =
            find_redexes(d).into_iter().map(|p| (d.clone(), p)).collect();
        for (_, r) in normalizations(d, opts, &rules) {
            let Ok(r) = r else { continue };
            let mut cur = d.clone();
            for p in &r.positions {
                let next = contract(&cur, p, &rules).expect("replaying a normalization");
                steps.push((cur, p.clone()));
                cur = next;
            }
        }
        for (before, p) in steps {
            t.case();
            let a = before
                .at(&p)
                .and_then(|n| n.as_node())
                .and_then(|n| n.left.as_node())
                .map(|inner| inner.left.internal_count());
            match (a, contract(&before, &p, &rules)) {
                (Some(a), Ok(after)) => {
                    let drop = before.sigma() as i64 - after.sigma() as i64;
                    t.expect(drop == a as i64 + 1, || {
                        format!("{} at {}: sigma fell by {}, expected {}", before.bracketed(), p, drop, a + 1)
                    });
                }
                (_, Err(e)) => t.fail(|| format!("{} at {}: {}", before.bracketed(), p, e)),
                (None, _) => t.fail(|| format!("{} at {}: not a redex", before.bracketed(), p)),
            }
        }
    }
    t.finish()
}

/// Normalization takes at most n(n-1)/2 steps; exhaustive search on small
/// derivations never exceeds it and left combs attain it.
pub fn termination_bound(cases: &[Derivation], opts: &CheckOptions) -> SuiteReport {
    let rules = unbounded_rules();
    let mut t = Tally::new("termination-bound");
    for d in cases {
        let n = d.internal_count();
        for (s, r) in normalizations(d, opts, &rules) {
            t.case();
            match r {
                Ok(r) => t.expect(r.steps <= triangular(n), || {
                    format!("{} under {}: {} steps > {}", d.bracketed(), s, r.steps, triangular(n))
                }),
                Err(e) => t.fail(|| format!("{} under {}: {}", d.bracketed(), s, e)),
            }
        }
        if n <= opts.explore_up_to {
            t.case();
            match explore_rewrites_limited(d, &rules, opts.explore_up_to) {
                Ok(e) => t.expect(e.max_length() <= triangular(n), || {
                    format!("{}: a sequence of {} steps exceeds {}", d.bracketed(), e.max_length(), triangular(n))
                }),
                Err(e) => t.fail(|| format!("{}: {}", d.bracketed(), e)),
            }
        }
    }
    for leaves in 2..=opts.explore_up_to + 1 {
        let n = leaves - 1;
        for (items, dir) in [
            (forward_chain(leaves), Direction::Forward),
            (backward_chain(leaves), Direction::Backward),
        ] {
            t.case();
            let comb = build_on_shape(&crate::gen::Shape::left_comb(leaves), &items, dir).expect("chains fit every shape");
            match explore_rewrites(&comb, &rules) {
                Ok(e) => t.expect(e.max_length() == triangular(n), || {
                    format!("left comb of {} nodes: longest sequence {} != {}", n, e.max_length(), triangular(n))
                }),
                Err(e) => t.fail(|| format!("left comb of {} nodes: {}", n, e)),
            }
        }
    }
    t.finish()
}

/// Root-first normalization takes at most n steps.
pub fn root_first_linearity(cases: &[Derivation], _opts: &CheckOptions) -> SuiteReport {
    let rules = unbounded_rules();
    let mut t = Tally::new("root-first-linearity");
    for d in cases {
        t.case();
        match normalize(d, RewriteStrategy::RootFirst, &rules) {
            Ok(r) => t.expect(r.steps <= d.internal_count(), || {
                format!("{}: {} root-first steps > {}", d.bracketed(), r.steps, d.internal_count())
            }),
            Err(e) => t.fail(|| format!("{}: {}", d.bracketed(), e)),
        }
    }
    t.finish()
}

/// All strategies agree on the normal form; on small derivations every
/// maximal rewrite sequence ends in the same derivation.
pub fn confluence(cases: &[Derivation], opts: &CheckOptions) -> SuiteReport {
    let rules = unbounded_rules();
    let mut t = Tally::new("confluence");
    for d in cases {
        t.case();
        let mut forms = BTreeSet::new();
        for (s, r) in normalizations(d, opts, &rules) {
            match r {
                Ok(r) => {
                    forms.insert(r.normal_form);
                }
                Err(e) => t.fail(|| format!("{} under {}: {}", d.bracketed(), s, e)),
            }
        }
        t.expect(forms.len() == 1, || format!("{}: {} distinct normal forms", d.bracketed(), forms.len()));
        if d.internal_count() <= 5 {
            t.case();
            match explore_rewrites(d, &rules) {
                Ok(e) => t.expect(e.normal_forms.len() == 1, || {
                    format!("{}: {} terminal forms", d.bracketed(), e.normal_forms.len())
                }),
                Err(e) => t.fail(|| format!("{}: {}", d.bracketed(), e)),
            }
        }
    }
    t.finish()
}

/// Normal forms keep the root category, the frontier and the meaning.
pub fn preservation(cases: &[Derivation], opts: &CheckOptions) -> SuiteReport {
    let rules = unbounded_rules();
    let mut t = Tally::new("preservation");
    for d in cases {
        for (s, r) in normalizations(d, opts, &rules) {
            t.case();
            let Ok(r) = r else {
                t.fail(|| format!("{} under {}: obstructed", d.bracketed(), s));
                continue;
            };
            let nf = &r.normal_form;
            t.expect(nf.cat() == d.cat(), || format!("{} under {}: category changed", d.bracketed(), s));
            t.expect(nf.frontier() == d.frontier(), || format!("{} under {}: frontier changed", d.bracketed(), s));
            match sem_equiv(d.sem(), nf.sem(), d.cat().arity()) {
                Ok(true) => {}
                Ok(false) => t.fail(|| format!("{} under {}: meaning changed", d.bracketed(), s)),
                Err(e) => t.fail(|| format!("{} under {}: {}", d.bracketed(), s, e)),
            }
        }
    }
    t.finish()
}

/// The exhaustive parser's spanning derivations are exactly the oracle's,
/// for every bundled grammar and test sentence.
pub fn oracle_equivalence() -> SuiteReport {
    let mut t = Tally::new("oracle-equivalence");
    let rules = RuleConfig::default();
    for g in bundled::all() {
        let lex = g.lexicon();
        for words in g.tokenized() {
            t.case();
            let oracle: BTreeSet<Derivation> = match enumerate_sentence(&words, &lex, &rules) {
                Ok(ds) => ds.into_iter().collect(),
                Err(e) => {
                    t.fail(|| format!("{}: {:?}: {}", g.name, words.join(" "), e));
                    continue;
                }
            };
            let parsed: BTreeSet<Derivation> = match parse(&words, &lex, &ParsePolicy::exhaustive()) {
                Ok(r) => r.spanning().into_iter().collect(),
                Err(e) => {
                    t.fail(|| format!("{}: {:?}: {}", g.name, words.join(" "), e));
                    continue;
                }
            };
            t.expect(parsed == oracle, || {
                format!(
                    "{}: {:?}: parser found {}, oracle {}",
                    g.name,
                    words.join(" "),
                    parsed.len(),
                    oracle.len()
                )
            });
        }
    }
    t.finish()
}

/// Runs every suite in order.
pub fn run_all(opts: &CheckOptions) -> Vec<SuiteReport> {
    let cases = rewrite_cases(opts);
    vec![
        sigma_descent(&cases, opts),
        termination_bound(&cases, opts),
        root_first_linearity(&cases, opts),
        confluence(&cases, opts),
        preservation(&cases, opts),
        oracle_equivalence(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CheckOptions {
        CheckOptions {
            random_cases: 40,
            exhaustive_leaves: 4,
            labellings: 1,
            random_strategies: 3,
            explore_up_to: 4,
            ..CheckOptions::default()
        }
    }

    #[test]
    fn small_run_passes_every_suite() {
        for r in run_all(&small()) {
            assert!(r.passed(), "{}: {:?}", r.name, r.examples);
        }
    }

    #[test]
    fn case_family_has_expected_size() {
        let opts = small();
        // shapes with 1..=4 leaves: 1 + 1 + 2 + 5, each labelled three ways
        assert_eq!(rewrite_cases(&opts).len(), 9 * 3 + 40);
    }

    #[test]
    fn bound_is_triangular() {
        assert_eq!((0..7).map(triangular).collect::<Vec<_>>(), [0, 0, 1, 3, 6, 10, 15]);
    }
}
