//! Derivation trees over lexical leaves.
//!
//! Every node caches its category and semantic term. Construction through
//! [`make_node`] checks the rule; [`Derivation::validate`] recomputes
//! everything from the leaves.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::category::{is_atom_char, Category, CategoryParseError};
use crate::rules::{apply_rule, Direction, RuleUse};
use crate::sem::{sem_of_combination, SemTerm};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Derivation {
    Leaf(Arc<Leaf>),
    Node(Arc<Node>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Leaf {
    pub word: String,
    pub cat: Category,
    pub sem: SemTerm,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub rule: RuleUse,
    pub left: Derivation,
    pub right: Derivation,
    pub cat: Category,
    pub sem: SemTerm,
    internal: usize,
    leaves: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DerivationError {
    #[error("rule {rule} cannot combine {left} with {right}")]
    Inapplicable {
        rule: RuleUse,
        left: Category,
        right: Category,
    },
    #[error("no node at position {0}")]
    BadPosition(Position),
    #[error("node at {position} caches {cached} but its children give {expected}")]
    Inconsistent {
        position: Position,
        cached: String,
        expected: String,
    },
    #[error("bad derivation notation at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error(transparent)]
    Category(#[from] CategoryParseError),
}

/// A leaf whose semantics is the constant named after the word.
pub fn leaf(word: &str, cat: Category) -> Derivation {
    leaf_with_sem(word, cat, SemTerm::constant(word))
}

pub fn leaf_with_sem(word: &str, cat: Category, sem: SemTerm) -> Derivation {
    Derivation::Leaf(Arc::new(Leaf {
        word: word.to_string(),
        cat,
        sem,
    }))
}

/// Combines two derivations with `rule`, computing category and semantics.
pub fn make_node(rule: RuleUse, left: Derivation, right: Derivation) -> Result<Derivation, DerivationError> {
    let cat = apply_rule(left.cat(), right.cat(), rule).ok_or_else(|| DerivationError::Inapplicable {
        rule,
        left: left.cat().clone(),
        right: right.cat().clone(),
    })?;
    let sem = match rule.direction {
        Direction::Forward => sem_of_combination(rule, left.sem().clone(), right.sem().clone()),
        Direction::Backward => sem_of_combination(rule, right.sem().clone(), left.sem().clone()),
    };
    let internal = 1 + left.internal_count() + right.internal_count();
    let leaves = left.leaf_count() + right.leaf_count();
    Ok(Derivation::Node(Arc::new(Node {
        rule,
        left,
        right,
        cat,
        sem,
        internal,
        leaves,
    })))
}

/// One step from a node to a child.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    L,
    R,
}

/// A path from the root. The empty path is the root itself.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(pub Vec<Branch>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn child(&self, b: Branch) -> Position {
        let mut p = self.0.clone();
        p.push(b);
        Position(p)
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        for b in &self.0 {
            f.write_str(match b {
                Branch::L => "L",
                Branch::R => "R",
            })?;
        }
        Ok(())
    }
}

impl Derivation {
    pub fn cat(&self) -> &Category {
        match self {
            Derivation::Leaf(l) => &l.cat,
            Derivation::Node(n) => &n.cat,
        }
    }

    pub fn sem(&self) -> &SemTerm {
        match self {
            Derivation::Leaf(l) => &l.sem,
            Derivation::Node(n) => &n.sem,
        }
    }

    pub fn as_node(&self) -> Option<&Node> {
        match self {
            Derivation::Leaf(_) => None,
            Derivation::Node(n) => Some(n),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Derivation::Leaf(_))
    }

    /// Number of internal nodes.
    pub fn internal_count(&self) -> usize {
        match self {
            Derivation::Leaf(_) => 0,
            Derivation::Node(n) => n.internal,
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Derivation::Leaf(_) => 1,
            Derivation::Node(n) => n.leaves,
        }
    }

    /// Termination score: zero at leaves, otherwise
    /// `sigma(left) + sigma(right) + internal_count(left)`.
    pub fn sigma(&self) -> usize {
        match self {
            Derivation::Leaf(_) => 0,
            Derivation::Node(n) => n.left.sigma() + n.right.sigma() + n.left.internal_count(),
        }
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<&Leaf> {
        let mut out = Vec::with_capacity(self.leaf_count());
        let mut stack = vec![self];
        while let Some(d) = stack.pop() {
            match d {
                Derivation::Leaf(l) => out.push(&**l),
                Derivation::Node(n) => {
                    stack.push(&n.right);
                    stack.push(&n.left);
                }
            }
        }
        out
    }

    /// `(word, category)` pairs of the frontier.
    pub fn frontier(&self) -> Vec<(String, Category)> {
        self.leaves()
            .into_iter()
            .map(|l| (l.word.clone(), l.cat.clone()))
            .collect()
    }

    pub fn words(&self) -> Vec<String> {
        self.leaves().into_iter().map(|l| l.word.clone()).collect()
    }

    pub fn at(&self, pos: &Position) -> Option<&Derivation> {
        let mut cur = self;
        for b in &pos.0 {
            let n = cur.as_node()?;
            cur = match b {
                Branch::L => &n.left,
                Branch::R => &n.right,
            };
        }
        Some(cur)
    }

    /// Replaces the subtree at `pos`, rebuilding the spine above it with the
    /// original rules. Fails if some rule no longer applies.
    pub fn replace_at(&self, pos: &Position, sub: Derivation) -> Result<Derivation, DerivationError> {
        self.replace_from(&pos.0, sub)
            .map_err(|e| match e {
                DerivationError::BadPosition(_) => DerivationError::BadPosition(pos.clone()),
                other => other,
            })
    }

    fn replace_from(&self, path: &[Branch], sub: Derivation) -> Result<Derivation, DerivationError> {
        let Some((first, rest)) = path.split_first() else {
            return Ok(sub);
        };
        let n = self
            .as_node()
            .ok_or_else(|| DerivationError::BadPosition(Position(path.to_vec())))?;
        match first {
            Branch::L => make_node(n.rule, n.left.replace_from(rest, sub)?, n.right.clone()),
            Branch::R => make_node(n.rule, n.left.clone(), n.right.replace_from(rest, sub)?),
        }
    }

    /// Every internal-node position in preorder.
    pub fn node_positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        fn walk(d: &Derivation, pos: Position, out: &mut Vec<Position>) {
            if let Derivation::Node(n) = d {
                out.push(pos.clone());
                walk(&n.left, pos.child(Branch::L), out);
                walk(&n.right, pos.child(Branch::R), out);
            }
        }
        walk(self, Position::root(), &mut out);
        out
    }

    /// The root, then each successive right child down to the rightmost leaf.
    pub fn right_frontier(&self) -> Vec<(Position, Category)> {
        let mut out = Vec::new();
        let mut pos = Position::root();
        let mut cur = self;
        loop {
            out.push((pos.clone(), cur.cat().clone()));
            match cur {
                Derivation::Leaf(_) => break,
                Derivation::Node(n) => {
                    cur = &n.right;
                    pos = pos.child(Branch::R);
                }
            }
        }
        out
    }

    /// Recomputes every cached category and semantic term from the leaves.
    pub fn validate(&self) -> Result<(), DerivationError> {
        fn check(d: &Derivation, pos: Position) -> Result<(), DerivationError> {
            let Derivation::Node(n) = d else {
                return Ok(());
            };
            check(&n.left, pos.child(Branch::L))?;
            check(&n.right, pos.child(Branch::R))?;
            let fresh = make_node(n.rule, n.left.clone(), n.right.clone())?;
            if fresh.cat() != &n.cat {
                return Err(DerivationError::Inconsistent {
                    position: pos,
                    cached: n.cat.to_string(),
                    expected: fresh.cat().to_string(),
                });
            }
            if fresh.sem() != &n.sem {
                return Err(DerivationError::Inconsistent {
                    position: pos,
                    cached: n.sem.to_string(),
                    expected: fresh.sem().to_string(),
                });
            }
            Ok(())
        }
        check(self, Position::root())
    }

    /// Indented rendering: category, then the rule name or the word, then
    /// the half-open word span.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        fn walk(d: &Derivation, depth: usize, start: usize, out: &mut String) {
            let indent = "  ".repeat(depth);
            match d {
                Derivation::Leaf(l) => {
                    out.push_str(&format!("{}{}  {}  {}\n", indent, l.cat, l.word, start));
                }
                Derivation::Node(n) => {
                    let end = start + n.leaves;
                    out.push_str(&format!("{}{}  {}  {}..{}\n", indent, n.cat, n.rule, start, end));
                    walk(&n.left, depth + 1, start, out);
                    walk(&n.right, depth + 1, start + n.left.leaf_count(), out);
                }
            }
        }
        walk(self, 0, 0, &mut out);
        out
    }

    /// Compact one-line form, e.g. `((john:s/vp >1 loves:vp/np) >0 mary:np)`.
    /// Parsed back by [`parse_bracketed`] when every word is a plain token.
    pub fn bracketed(&self) -> String {
        match self {
            Derivation::Leaf(l) => format!("{}:{}", l.word, l.cat),
            Derivation::Node(n) => format!("({} {} {})", n.left.bracketed(), n.rule, n.right.bracketed()),
        }
    }

    /// Words and rules only, used as a short digest in traces.
    pub fn digest(&self) -> String {
        match self {
            Derivation::Leaf(l) => l.word.clone(),
            Derivation::Node(n) => format!("({} {} {})", n.left.digest(), n.rule, n.right.digest()),
        }
    }

    /// Nested record form for machine consumption.
    pub fn to_record(&self) -> DerivationRecord {
        match self {
            Derivation::Leaf(l) => DerivationRecord::Leaf {
                word: l.word.clone(),
                cat: l.cat.clone(),
            },
            Derivation::Node(n) => DerivationRecord::Node {
                rule: n.rule,
                cat: n.cat.clone(),
                left: Box::new(n.left.to_record()),
                right: Box::new(n.right.to_record()),
            },
        }
    }

    /// Rebuilds from a record, re-checking every rule. Cached categories in
    /// the record must agree with the recomputed ones.
    pub fn from_record(rec: &DerivationRecord) -> Result<Derivation, DerivationError> {
        match rec {
            DerivationRecord::Leaf { word, cat } => Ok(leaf(word, cat.clone())),
            DerivationRecord::Node { rule, cat, left, right } => {
                let d = make_node(*rule, Derivation::from_record(left)?, Derivation::from_record(right)?)?;
                if d.cat() != cat {
                    return Err(DerivationError::Inconsistent {
                        position: Position::root(),
                        cached: cat.to_string(),
                        expected: d.cat().to_string(),
                    });
                }
                Ok(d)
            }
        }
    }
}

impl fmt::Debug for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bracketed())
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DerivationRecord {
    Node {
        rule: RuleUse,
        cat: Category,
        left: Box<DerivationRecord>,
        right: Box<DerivationRecord>,
    },
    Leaf {
        word: String,
        cat: Category,
    },
}

impl Serialize for Derivation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_record().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Derivation {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rec = DerivationRecord::deserialize(deserializer)?;
        Derivation::from_record(&rec).map_err(serde::de::Error::custom)
    }
}

/// Parses the bracketed notation produced by [`Derivation::bracketed`].
///
/// ```text
/// tree := word ':' category | '(' tree rule tree ')'
/// rule := ('>' | '<') digits
/// ```
pub fn parse_bracketed(text: &str) -> Result<Derivation, DerivationError> {
    let mut p = BracketParser { src: text, pos: 0 };
    let d = p.tree()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.err("trailing input"));
    }
    Ok(d)
}

struct BracketParser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> BracketParser<'a> {
    fn err(&self, msg: &str) -> DerivationError {
        DerivationError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn tree(&mut self) -> Result<Derivation, DerivationError> {
        self.skip_ws();
        if self.rest().starts_with('(') {
            self.pos += 1;
            let left = self.tree()?;
            self.skip_ws();
            let rule = self.rule()?;
            let right = self.tree()?;
            self.skip_ws();
            if !self.rest().starts_with(')') {
                return Err(self.err("expected ')'"));
            }
            self.pos += 1;
            make_node(rule, left, right)
        } else {
            self.leaf()
        }
    }

    fn rule(&mut self) -> Result<RuleUse, DerivationError> {
        let len = self
            .rest()
            .char_indices()
            .find(|&(i, c)| i > 0 && !c.is_ascii_digit())
            .map_or(self.rest().len(), |(i, _)| i);
        let text = &self.rest()[..len];
        let rule = text.parse().map_err(|_| self.err("expected a rule like >0 or <1"))?;
        self.pos += len;
        Ok(rule)
    }

    fn leaf(&mut self) -> Result<Derivation, DerivationError> {
        let word_len = self
            .rest()
            .char_indices()
            .find(|&(_, c)| c == ':' || c.is_whitespace() || c == '(' || c == ')')
            .map_or(self.rest().len(), |(i, _)| i);
        if word_len == 0 {
            return Err(self.err("expected a word"));
        }
        let word = &self.rest()[..word_len];
        self.pos += word_len;
        if !self.rest().starts_with(':') {
            return Err(self.err("expected ':' after word"));
        }
        self.pos += 1;
        // A category ends at whitespace or at an unmatched ')'.
        let mut depth = 0usize;
        let mut end = self.rest().len();
        for (i, c) in self.rest().char_indices() {
            match c {
                '(' => depth += 1,
                ')' if depth == 0 => {
                    end = i;
                    break;
                }
                ')' => depth -= 1,
                c if c.is_whitespace() => {
                    end = i;
                    break;
                }
                c if is_atom_char(c) || c == '/' || c == '\\' => {}
                _ => {
                    end = i;
                    break;
                }
            }
        }
        let text = &self.rest()[..end];
        let start = self.pos;
        let cat: Category = text.parse().map_err(|e: CategoryParseError| DerivationError::Syntax {
            pos: start + e.position().unwrap_or(0),
            msg: e.to_string(),
        })?;
        self.pos += end;
        Ok(leaf(word, cat))
    }
}
