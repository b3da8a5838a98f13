//! Generalized forward and backward combination.
//!
//! Forward `>n`:  `X/Y  Y|Z1..|Zn  =>  X|Z1..|Zn`
//! Backward `<n`: `Y|Z1..|Zn  X\Y  =>  X|Z1..|Zn`
//!
//! Degree 0 is function application. Each `|Zi` keeps its own slash, so a
//! forward rule may compose into backward arguments and vice versa.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::category::{Arg, Category, Slash};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    /// The slash a functor of this direction carries on its outermost argument.
    pub fn slash(self) -> Slash {
        match self {
            Direction::Forward => Slash::Forward,
            Direction::Backward => Slash::Backward,
        }
    }
}

/// One rule instance, written `>n` or `<n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleUse {
    pub direction: Direction,
    pub degree: usize,
}

impl RuleUse {
    pub const fn forward(degree: usize) -> RuleUse {
        RuleUse { direction: Direction::Forward, degree }
    }

    pub const fn backward(degree: usize) -> RuleUse {
        RuleUse { direction: Direction::Backward, degree }
    }
}

impl fmt::Display for RuleUse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = match self.direction {
            Direction::Forward => '>',
            Direction::Backward => '<',
        };
        write!(f, "{}{}", sym, self.degree)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad rule name {0:?}: expected >n or <n")]
pub struct RuleParseError(pub String);

impl FromStr for RuleUse {
    type Err = RuleParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let direction = match s.chars().next() {
            Some('>') => Direction::Forward,
            Some('<') => Direction::Backward,
            _ => return Err(RuleParseError(s.to_string())),
        };
        let degree = s[1..].parse().map_err(|_| RuleParseError(s.to_string()))?;
        Ok(RuleUse { direction, degree })
    }
}

impl Serialize for RuleUse {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RuleUse {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// The variables bound when a rule matches, handed to predicate hooks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleMatch {
    pub rule: RuleUse,
    pub x: Category,
    pub y: Category,
    /// Composed arguments, outermost first.
    pub zs: Vec<Arg>,
}

impl RuleMatch {
    pub fn result(&self) -> Category {
        Category::reassemble(self.x.clone(), &self.zs)
    }
}

/// Binds `X`, `Y` and `Z1..Zn` for `rule`, or `None` when the shapes do not fit.
pub fn match_rule(left: &Category, right: &Category, rule: RuleUse) -> Option<RuleMatch> {
    let (functor, argument) = match rule.direction {
        Direction::Forward => (left, right),
        Direction::Backward => (right, left),
    };
    let (x, slash, y) = functor.as_functor()?;
    if slash != rule.direction.slash() {
        return None;
    }
    let (core, zs) = argument.peel(rule.degree)?;
    if &core != y {
        return None;
    }
    Some(RuleMatch {
        rule,
        x: x.clone(),
        y: y.clone(),
        zs,
    })
}

/// Applies one rule instance. Failure to match is a normal outcome.
pub fn apply_rule(left: &Category, right: &Category, rule: RuleUse) -> Option<Category> {
    match_rule(left, right, rule).map(|m| m.result())
}

/// The unique rule of `direction` that combines `left` and `right`, ignoring
/// any configured restriction. At most one degree can match because the
/// argument category `Y` has a fixed size.
pub fn infer_rule(left: &Category, right: &Category, direction: Direction) -> Option<RuleMatch> {
    let argument = match direction {
        Direction::Forward => right,
        Direction::Backward => left,
    };
    (0..=argument.arity()).find_map(|degree| match_rule(left, right, RuleUse { direction, degree }))
}

pub type RulePredicate = Arc<dyn Fn(&RuleMatch) -> bool + Send + Sync>;

/// Which rule instances a grammar admits.
#[derive(Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleConfig {
    pub max_degree: usize,
    pub blocked: BTreeSet<RuleUse>,
    /// Extra per-rule category tests; every hook must accept a match.
    #[serde(skip)]
    pub predicates: Vec<RulePredicate>,
}

pub const DEFAULT_MAX_DEGREE: usize = 3;

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            max_degree: DEFAULT_MAX_DEGREE,
            blocked: BTreeSet::new(),
            predicates: Vec::new(),
        }
    }
}

impl fmt::Debug for RuleConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RuleConfig")
            .field("max_degree", &self.max_degree)
            .field("blocked", &self.blocked)
            .field("predicates", &self.predicates.len())
            .finish()
    }
}

impl PartialEq for RuleConfig {
    fn eq(&self, other: &Self) -> bool {
        self.max_degree == other.max_degree
            && self.blocked == other.blocked
            && self.predicates.len() == other.predicates.len()
            && self
                .predicates
                .iter()
                .zip(&other.predicates)
                .all(|(a, b)| Arc::ptr_eq(a, b))
    }
}

impl RuleConfig {
    pub fn with_max_degree(max_degree: usize) -> RuleConfig {
        RuleConfig {
            max_degree,
            ..RuleConfig::default()
        }
    }

    pub fn block(mut self, rule: RuleUse) -> RuleConfig {
        self.blocked.insert(rule);
        self
    }

    pub fn with_predicate<F>(mut self, pred: F) -> RuleConfig
    where
        F: Fn(&RuleMatch) -> bool + Send + Sync + 'static,
    {
        self.predicates.push(Arc::new(pred));
        self
    }

    /// Whether the grammar admits this particular match.
    pub fn permits(&self, m: &RuleMatch) -> bool {
        m.rule.degree <= self.max_degree
            && !self.blocked.contains(&m.rule)
            && self.predicates.iter().all(|p| p(m))
    }
}

/// Every admitted rule instance combining `left` and `right`, forward rules
/// first, then ascending degree.
pub fn enumerate_combinations(
    left: &Category,
    right: &Category,
    config: &RuleConfig,
) -> Vec<(RuleUse, Category)> {
    let mut out = Vec::new();
    for direction in [Direction::Forward, Direction::Backward] {
        // the composed arguments come from the non-functor side
        let cap = match direction {
            Direction::Forward => right.arity(),
            Direction::Backward => left.arity(),
        };
        for degree in 0..=config.max_degree.min(cap) {
            let rule = RuleUse { direction, degree };
            if let Some(m) = match_rule(left, right, rule) {
                if config.permits(&m) {
                    out.push((rule, m.result()));
                }
            }
        }
    }
    out
}
