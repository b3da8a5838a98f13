//! The derivation rewrite system: rotate a left-nested pair of same-direction
//! combinations into a right-nested one.
//!
//! ```text
//!        e                     e'
//!       / \                   /  \
//!      d   c       ==>       a    f
//!     / \                        / \
//!    a   b                      b   c
//! ```
//!
//! Forward: `(a >m b) >n c  ==>  a >(m+n-1) (b >n c)`, requires `m >= 1`.
//! Backward: `(a <n b) <p c  ==>  a <n (b <(p-n+1) c)`, requires `p >= n`.
//!
//! Both conditions say the outer rule consumes an argument contributed by
//! `b`; without them the rotation is not defined (for example
//! `(whose >0 cat) >0 find` cannot be rotated). Degrees in the contractum are
//! recomputed from the categories.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::derivation::{make_node, Branch, Derivation, DerivationError, Node, Position};
use crate::rules::{infer_rule, Direction, RuleConfig, RuleUse};

/// How to pick the next redex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RewriteStrategy {
    /// The redex closest to the root; leftmost among equals.
    RootFirst,
    /// A redex with no redex below it; leftmost among those.
    LeftmostInnermost,
    /// Uniform choice from a generator seeded with the given value.
    RandomSeeded(u64),
}

impl fmt::Display for RewriteStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RewriteStrategy::RootFirst => f.write_str("root-first"),
            RewriteStrategy::LeftmostInnermost => f.write_str("leftmost-innermost"),
            RewriteStrategy::RandomSeeded(seed) => write!(f, "random:{}", seed),
        }
    }
}

impl FromStr for RewriteStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "root-first" => Ok(RewriteStrategy::RootFirst),
            "leftmost-innermost" => Ok(RewriteStrategy::LeftmostInnermost),
            other => other
                .strip_prefix("random:")
                .and_then(|seed| seed.parse().ok())
                .map(RewriteStrategy::RandomSeeded)
                .ok_or_else(|| format!("unknown strategy {:?}; use root-first, leftmost-innermost or random:SEED", other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RewriteReport {
    pub normal_form: Derivation,
    pub steps: usize,
    /// σ before the first step and after every step.
    pub sigma_trace: Vec<usize>,
    /// Where each contraction happened, in order.
    #[serde(serialize_with = "positions_as_strings")]
    pub positions: Vec<Position>,
}

fn positions_as_strings<S: serde::Serializer>(ps: &[Position], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(ps.iter().map(|p| p.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("no redex at {0}")]
    NotARedex(Position),
    #[error("rewrite obstructed at {position}: {rule} is not admitted by the grammar")]
    Obstructed { position: Position, rule: RuleUse },
    #[error(transparent)]
    Derivation(#[from] DerivationError),
}

/// Whether the node itself (not its descendants) is a redex.
pub fn is_redex(d: &Derivation) -> bool {
    let Some(outer) = d.as_node() else {
        return false;
    };
    let Some(inner) = outer.left.as_node() else {
        return false;
    };
    if outer.rule.direction != inner.rule.direction {
        return false;
    }
    match outer.rule.direction {
        Direction::Forward => inner.rule.degree >= 1,
        Direction::Backward => outer.rule.degree >= inner.rule.degree,
    }
}

/// All redex positions in preorder.
pub fn find_redexes(d: &Derivation) -> Vec<Position> {
    d.node_positions()
        .into_iter()
        .filter(|p| d.at(p).is_some_and(is_redex))
        .collect()
}

pub fn is_normal_form(d: &Derivation) -> bool {
    fn any_redex(d: &Derivation) -> bool {
        match d.as_node() {
            None => false,
            Some(n) => is_redex(d) || any_redex(&n.left) || any_redex(&n.right),
        }
    }
    !any_redex(d)
}

fn combine(
    left: Derivation,
    right: Derivation,
    direction: Direction,
    config: &RuleConfig,
    position: &Position,
) -> Result<Derivation, RewriteError> {
    let m = infer_rule(left.cat(), right.cat(), direction).ok_or_else(|| {
        // only reachable when the redex conditions were violated
        RewriteError::NotARedex(position.clone())
    })?;
    if !config.permits(&m) {
        return Err(RewriteError::Obstructed {
            position: position.clone(),
            rule: m.rule,
        });
    }
    Ok(make_node(m.rule, left, right)?)
}

/// Rotates the redex rooted at this node.
fn contract_here(node: &Node, config: &RuleConfig, position: &Position) -> Result<Derivation, RewriteError> {
    let inner = node.left.as_node().expect("redex has an internal left child");
    let direction = node.rule.direction;
    let f = combine(inner.right.clone(), node.right.clone(), direction, config, position)?;
    combine(inner.left.clone(), f, direction, config, position)
}

/// Replaces the redex at `p` by its contractum and rebuilds the spine above.
pub fn contract(d: &Derivation, p: &Position, config: &RuleConfig) -> Result<Derivation, RewriteError> {
    let sub = d.at(p).ok_or_else(|| RewriteError::NotARedex(p.clone()))?;
    if !is_redex(sub) {
        return Err(RewriteError::NotARedex(p.clone()));
    }
    let node = sub.as_node().expect("redexes are internal nodes");
    let contractum = contract_here(node, config, p)?;
    debug_assert_eq!(contractum.cat(), sub.cat());
    Ok(d.replace_at(p, contractum)?)
}

/// The position the strategy contracts next, if any redex remains.
fn choose(d: &Derivation, strategy: RewriteStrategy, rng: &mut Option<ChaCha8Rng>) -> Option<Position> {
    match strategy {
        RewriteStrategy::RootFirst => {
            // breadth-first, left to right
            let mut frontier = vec![(Position::root(), d)];
            while !frontier.is_empty() {
                let mut next = Vec::new();
                for (pos, t) in frontier {
                    if is_redex(t) {
                        return Some(pos);
                    }
                    if let Some(n) = t.as_node() {
                        next.push((pos.child(Branch::L), &n.left));
                        next.push((pos.child(Branch::R), &n.right));
                    }
                }
                frontier = next;
            }
            None
        }
        RewriteStrategy::LeftmostInnermost => {
            // the first redex in postorder has no redex beneath it
            fn post(d: &Derivation, pos: Position) -> Option<Position> {
                let n = d.as_node()?;
                post(&n.left, pos.child(Branch::L))
                    .or_else(|| post(&n.right, pos.child(Branch::R)))
                    .or_else(|| is_redex(d).then_some(pos))
            }
            post(d, Position::root())
        }
        RewriteStrategy::RandomSeeded(_) => {
            let redexes = find_redexes(d);
            let rng = rng.as_mut().expect("random strategy carries a generator");
            redexes.choose(rng).cloned()
        }
    }
}

/// Contracts redexes chosen by `strategy` until none remain.
pub fn normalize(d: &Derivation, strategy: RewriteStrategy, config: &RuleConfig) -> Result<RewriteReport, RewriteError> {
    let mut rng = match strategy {
        RewriteStrategy::RandomSeeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut cur = d.clone();
    let mut sigma_trace = vec![cur.sigma()];
    let mut positions = Vec::new();
    while let Some(p) = choose(&cur, strategy, &mut rng) {
        cur = contract(&cur, &p, config)?;
        sigma_trace.push(cur.sigma());
        positions.push(p);
    }
    Ok(RewriteReport {
        normal_form: cur,
        steps: positions.len(),
        sigma_trace,
        positions,
    })
}

/// The strategies used by confluence checks: root-first, leftmost-innermost
/// and `seeds` random ones.
pub fn standard_strategies(seeds: u64) -> Vec<RewriteStrategy> {
    let mut out = vec![RewriteStrategy::RootFirst, RewriteStrategy::LeftmostInnermost];
    out.extend((0..seeds).map(RewriteStrategy::RandomSeeded));
    out
}

/// True iff every strategy reaches the same normal form.
pub fn check_confluence(
    d: &Derivation,
    strategies: &[RewriteStrategy],
    config: &RuleConfig,
) -> Result<bool, RewriteError> {
    let mut forms = BTreeSet::new();
    for s in strategies {
        forms.insert(normalize(d, *s, config)?.normal_form);
    }
    Ok(forms.len() <= 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::cat;
    use crate::derivation::{leaf, parse_bracketed};
    use crate::sem::sem_equiv;

    fn d(text: &str) -> Derivation {
        parse_bracketed(text).unwrap()
    }

    fn john_loves_mary_left() -> Derivation {
        d("((john:s/vp >1 loves:vp/np) >0 mary:np)")
    }

    #[test]
    fn finds_root_redex_in_left_branching_clause() {
        assert_eq!(find_redexes(&john_loves_mary_left()), vec![Position::root()]);
    }

    #[test]
    fn right_comb_has_no_redex() {
        let r = d("(a:x0/x1 >1 (b:x1/x2 >1 (c:x2/x3 >1 e:x3/x4)))");
        assert!(find_redexes(&r).is_empty());
        assert!(is_normal_form(&r));
    }

    #[test]
    fn mixed_direction_is_not_a_redex() {
        let t = d("(p:a/b >0 ((q:c <0 r:d\\c) <0 t:b\\d))");
        assert_eq!(find_redexes(&t), vec![Position(vec![Branch::R])]);
    }

    #[test]
    fn application_inside_forward_is_not_a_redex() {
        let t = d("((whose:q/(s/np)/n >0 cat:n) >0 ((did:s/s >1 fred:s/(s\\np)) >1 find:s\\np/np))");
        assert_eq!(find_redexes(&t), vec![Position(vec![Branch::R])]);
    }

    #[test]
    fn contracts_subject_verb_object() {
        let nf = contract(&john_loves_mary_left(), &Position::root(), &RuleConfig::default()).unwrap();
        assert_eq!(nf, d("(john:s/vp >0 (loves:vp/np >0 mary:np))"));
    }

    #[test]
    fn contracts_backward_pair_exposing_b_over_c() {
        let t = d("((q:c <0 r:d\\c) <0 t:b\\d)");
        let nf = contract(&t, &Position::root(), &RuleConfig::default()).unwrap();
        assert_eq!(nf, d("(q:c <0 (r:d\\c <1 t:b\\d))"));
        let cats: Vec<String> = nf.right_frontier().iter().map(|(_, c)| c.to_string()).collect();
        assert_eq!(cats, ["b", "b\\c", "b\\d"]);
    }

    #[test]
    fn contracts_composition_chain() {
        let t = d("((a:a/b >1 b:b/c) >1 c:c/d)");
        let nf = contract(&t, &Position::root(), &RuleConfig::default()).unwrap();
        assert_eq!(nf, d("(a:a/b >1 (b:b/c >1 c:c/d))"));
    }

    #[test]
    fn contraction_errors() {
        let t = d("(a:a/b >1 (b:b/c >1 c:c/d))");
        assert_eq!(
            contract(&t, &Position::root(), &RuleConfig::default()),
            Err(RewriteError::NotARedex(Position::root()))
        );
        let t = john_loves_mary_left();
        let blocked = RuleConfig::default().block(RuleUse::forward(0));
        assert!(matches!(
            contract(&t, &Position::root(), &blocked),
            Err(RewriteError::Obstructed { .. })
        ));
        let nf = normalize(&t, RewriteStrategy::RootFirst, &blocked);
        assert!(matches!(nf, Err(RewriteError::Obstructed { .. })));
    }

    #[test]
    fn sigma_drops_by_left_left_size_plus_one() {
        // a = (x0/x1 >1 x1/x2) has one internal node
        let t = d("(((w0:x0/x1 >1 w1:x1/x2) >1 w2:x2/x3) >1 w3:x3/x4)");
        let before = t.sigma();
        let after = contract(&t, &Position::root(), &RuleConfig::default()).unwrap().sigma();
        assert_eq!(before - after, 2);
    }

    #[test]
    fn normalizes_left_comb() {
        let t = d("(((w0:x0/x1 >1 w1:x1/x2) >1 w2:x2/x3) >1 w3:x3/x4)");
        let rf = normalize(&t, RewriteStrategy::RootFirst, &RuleConfig::default()).unwrap();
        let li = normalize(&t, RewriteStrategy::LeftmostInnermost, &RuleConfig::default()).unwrap();
        assert_eq!(li.steps, 3);
        assert_eq!(li.sigma_trace, vec![3, 2, 1, 0]);
        assert!(rf.steps <= 3);
        assert_eq!(rf.sigma_trace.len(), rf.steps + 1);
        assert_eq!(rf.normal_form, li.normal_form);
        assert_eq!(li.normal_form, d("(w0:x0/x1 >1 (w1:x1/x2 >1 (w2:x2/x3 >1 w3:x3/x4)))"));
        assert!(sem_equiv(t.sem(), li.normal_form.sem(), 1).unwrap());
    }

    #[test]
    fn leaf_normalizes_in_zero_steps() {
        let l = leaf("x", cat("np"));
        let r = normalize(&l, RewriteStrategy::RootFirst, &RuleConfig::default()).unwrap();
        assert_eq!(r.steps, 0);
        assert_eq!(r.normal_form, l);
        assert_eq!(r.sigma_trace, vec![0]);
    }

    #[test]
    fn single_redex_confluence() {
        assert!(check_confluence(&john_loves_mary_left(), &standard_strategies(10), &RuleConfig::default()).unwrap());
    }

    #[test]
    fn overlapping_redexes_join() {
        // root and its left child are both redexes and share the left child
        let t = d("(((w0:x0/x1 >1 w1:x1/x2) >1 w2:x2/x3) >1 w3:x3/x4)");
        let redexes = find_redexes(&t);
        assert_eq!(redexes, vec![Position::root(), Position(vec![Branch::L])]);
        let cfg = RuleConfig::default();
        let via_root = normalize(&contract(&t, &redexes[0], &cfg).unwrap(), RewriteStrategy::LeftmostInnermost, &cfg).unwrap();
        let via_left = normalize(&contract(&t, &redexes[1], &cfg).unwrap(), RewriteStrategy::RootFirst, &cfg).unwrap();
        assert_eq!(via_root.normal_form, via_left.normal_form);
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in standard_strategies(2) {
            assert_eq!(s.to_string().parse::<RewriteStrategy>().unwrap(), s);
        }
        assert!("sideways".parse::<RewriteStrategy>().is_err());
    }

    #[test]
    fn random_strategy_is_reproducible() {
        let t = d("((((w0:x0/x1 >1 w1:x1/x2) >1 w2:x2/x3) >1 w3:x3/x4) >1 w4:x4/x5)");
        let cfg = RuleConfig::default();
        let a = normalize(&t, RewriteStrategy::RandomSeeded(7), &cfg).unwrap();
        let b = normalize(&t, RewriteStrategy::RandomSeeded(7), &cfg).unwrap();
        assert_eq!(a, b);
    }
}
