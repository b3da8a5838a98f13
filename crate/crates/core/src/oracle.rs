//! Brute-force ground truth: every derivation of a category sequence, every
//! maximal rewrite sequence, and partitions by semantic equivalence.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::category::Category;
use crate::derivation::{leaf, make_node, Derivation};
use crate::lexicon::Lexicon;
use crate::rewrite::{contract, find_redexes, RewriteError};
use crate::rules::{enumerate_combinations, RuleConfig};
use crate::sem::{sem_equiv, SemError};

/// Longest sequence [`enumerate_all`] accepts.
pub const MAX_ENUMERATION_LEN: usize = 10;
/// Largest derivation (internal nodes) [`explore_rewrites`] accepts.
pub const MAX_EXPLORATION_SIZE: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("sequence of {len} items exceeds the enumeration guard of {max}")]
    TooLong { len: usize, max: usize },
    #[error("derivation with {size} internal nodes exceeds the exploration guard of {max}")]
    TooLarge { size: usize, max: usize },
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Sem(#[from] SemError),
}

/// Every derivation spanning the whole sequence, over every split point and
/// every admitted rule. Span results are memoized.
pub fn enumerate_all(items: &[(String, Category)], config: &RuleConfig) -> Result<Vec<Derivation>, OracleError> {
    enumerate_all_limited(items, config, MAX_ENUMERATION_LEN)
}

/// [`enumerate_all`] with a caller-chosen length guard.
pub fn enumerate_all_limited(
    items: &[(String, Category)],
    config: &RuleConfig,
    max_len: usize,
) -> Result<Vec<Derivation>, OracleError> {
    if items.len() > max_len {
        return Err(OracleError::TooLong {
            len: items.len(),
            max: max_len,
        });
    }
    if items.is_empty() {
        return Ok(Vec::new());
    }
    let n = items.len();
    let mut spans: HashMap<(usize, usize), Vec<Derivation>> = HashMap::new();
    for (i, (w, c)) in items.iter().enumerate() {
        spans.insert((i, i + 1), vec![leaf(w, c.clone())]);
    }
    for len in 2..=n {
        for start in 0..=n - len {
            let end = start + len;
            let mut here = Vec::new();
            for mid in start + 1..end {
                let (ls, rs) = (&spans[&(start, mid)], &spans[&(mid, end)]);
                for l in ls {
                    for r in rs {
                        for (rule, _) in enumerate_combinations(l.cat(), r.cat(), config) {
                            here.push(make_node(rule, l.clone(), r.clone()).expect("enumerated rules apply"));
                        }
                    }
                }
            }
            spans.insert((start, end), here);
        }
    }
    Ok(spans.remove(&(0, n)).unwrap_or_default())
}

/// Every derivation of a sentence over every combination of lexical
/// readings. Unknown words give no derivations.
pub fn enumerate_sentence<S: AsRef<str>>(
    words: &[S],
    lex: &Lexicon,
    config: &RuleConfig,
) -> Result<Vec<Derivation>, OracleError> {
    if words.len() > MAX_ENUMERATION_LEN {
        return Err(OracleError::TooLong {
            len: words.len(),
            max: MAX_ENUMERATION_LEN,
        });
    }
    let mut readings: Vec<Vec<(String, Category)>> = vec![Vec::new()];
    for w in words {
        let w = w.as_ref();
        let Some(entries) = lex.entries(w) else {
            return Ok(Vec::new());
        };
        readings = readings
            .into_iter()
            .flat_map(|prefix| {
                entries.iter().map(move |e| {
                    let mut p = prefix.clone();
                    p.push((w.to_string(), e.cat.clone()));
                    p
                })
            })
            .collect();
    }
    let mut out = Vec::new();
    for items in readings {
        out.extend(enumerate_all(&items, config)?);
    }
    Ok(out)
}

/// Result of exploring every maximal contraction sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RewriteExploration {
    /// Number of maximal sequences of each length.
    pub lengths: BTreeMap<usize, u64>,
    /// Distinct terminal derivations reached.
    pub normal_forms: BTreeSet<Derivation>,
}

impl RewriteExploration {
    pub fn max_length(&self) -> usize {
        self.lengths.keys().next_back().copied().unwrap_or(0)
    }

    pub fn sequence_count(&self) -> u64 {
        self.lengths.values().sum()
    }
}

/// Explores every maximal contraction sequence from `d`. Shared
/// intermediate derivations are explored once.
pub fn explore_rewrites(d: &Derivation, config: &RuleConfig) -> Result<RewriteExploration, OracleError> {
    explore_rewrites_limited(d, config, MAX_EXPLORATION_SIZE)
}

/// [`explore_rewrites`] with a caller-chosen size guard.
pub fn explore_rewrites_limited(
    d: &Derivation,
    config: &RuleConfig,
    max_size: usize,
) -> Result<RewriteExploration, OracleError> {
    if d.internal_count() > max_size {
        return Err(OracleError::TooLarge {
            size: d.internal_count(),
            max: max_size,
        });
    }
    fn walk(
        d: &Derivation,
        config: &RuleConfig,
        memo: &mut HashMap<Derivation, RewriteExploration>,
    ) -> Result<RewriteExploration, OracleError> {
        if let Some(hit) = memo.get(d) {
            return Ok(hit.clone());
        }
        let redexes = find_redexes(d);
        let mut out = RewriteExploration::default();
        if redexes.is_empty() {
            out.lengths.insert(0, 1);
            out.normal_forms.insert(d.clone());
        }
        for p in redexes {
            let sub = walk(&contract(d, &p, config)?, config, memo)?;
            for (len, count) in sub.lengths {
                *out.lengths.entry(len + 1).or_default() += count;
            }
            out.normal_forms.extend(sub.normal_forms);
        }
        memo.insert(d.clone(), out.clone());
        Ok(out)
    }
    walk(d, config, &mut HashMap::new())
}

/// Lengths of every maximal contraction sequence from `d`, as a histogram.
pub fn all_rewrite_sequences(d: &Derivation, config: &RuleConfig) -> Result<BTreeMap<usize, u64>, OracleError> {
    explore_rewrites(d, config).map(|e| e.lengths)
}

/// Groups derivations into classes of equivalent semantics. Classes keep
/// input order; the first member of each class is its representative.
pub fn sem_partition(derivs: &[Derivation]) -> Result<Vec<Vec<Derivation>>, OracleError> {
    let mut classes: Vec<Vec<Derivation>> = Vec::new();
    for d in derivs {
        let arity = d.cat().arity();
        let mut placed = false;
        for class in classes.iter_mut() {
            let rep = &class[0];
            if rep.cat() == d.cat() && sem_equiv(rep.sem(), d.sem(), arity)? {
                class.push(d.clone());
                placed = true;
                break;
            }
        }
        if !placed {
            classes.push(vec![d.clone()]);
        }
    }
    Ok(classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::cat;
    use crate::derivation::parse_bracketed;
    use crate::gen::{backward_chain, forward_chain};

    fn catalan(n: usize) -> usize {
        (0..n).fold(1usize, |c, i| c * 2 * (2 * i + 1) / (i + 2))
    }

    #[test]
    fn seven_chain_has_132_derivations_in_one_class() {
        let ds = enumerate_all(&forward_chain(7), &RuleConfig::default()).unwrap();
        assert_eq!(ds.len(), 132);
        assert!(ds.iter().all(|d| d.cat() == &cat("x0/x7")));
        assert_eq!(sem_partition(&ds).unwrap().len(), 1);
    }

    #[test]
    fn small_counts() {
        let two = vec![("a".to_string(), cat("a/b")), ("b".to_string(), cat("b"))];
        assert_eq!(enumerate_all(&two, &RuleConfig::default()).unwrap().len(), 1);
        assert_eq!(enumerate_all(&forward_chain(5), &RuleConfig::default()).unwrap().len(), 14);
        for n in 1..=8 {
            assert_eq!(enumerate_all(&forward_chain(n), &RuleConfig::default()).unwrap().len(), catalan(n - 1));
            assert_eq!(enumerate_all(&backward_chain(n), &RuleConfig::default()).unwrap().len(), catalan(n - 1));
        }
    }

    #[test]
    fn length_guard() {
        assert!(matches!(
            enumerate_all(&forward_chain(11), &RuleConfig::default()),
            Err(OracleError::TooLong { len: 11, .. })
        ));
    }

    #[test]
    fn rewrite_sequences_of_a_left_comb() {
        let d = parse_bracketed("(((w0:x0/x1 >1 w1:x1/x2) >1 w2:x2/x3) >1 w3:x3/x4)").unwrap();
        let e = explore_rewrites(&d, &RuleConfig::default()).unwrap();
        assert_eq!(e.max_length(), 3);
        assert_eq!(e.normal_forms.len(), 1);
        let single = parse_bracketed("((a:a/b >1 b:b/c) >1 c:c/d)").unwrap();
        assert_eq!(all_rewrite_sequences(&single, &RuleConfig::default()).unwrap(), BTreeMap::from([(1, 1)]));
    }

    #[test]
    fn left_combs_attain_the_quadratic_bound() {
        use crate::gen::{build_on_shape, Shape};
        use crate::rules::Direction;
        for leaves in 2..=7 {
            let n = leaves - 1;
            for dir in [Direction::Forward, Direction::Backward] {
                let items = if dir == Direction::Forward { forward_chain(leaves) } else { backward_chain(leaves) };
                let d = build_on_shape(&Shape::left_comb(leaves), &items, dir).unwrap();
                let e = explore_rewrites(&d, &RuleConfig::with_max_degree(usize::MAX)).unwrap();
                assert_eq!(e.max_length(), n * (n - 1) / 2, "{} leaves {:?}", leaves, dir);
                assert_eq!(e.normal_forms.len(), 1);
            }
        }
    }

    #[test]
    fn exploration_guard() {
        let mut d = crate::derivation::leaf("w0", cat("x0/x1"));
        for i in 1..8 {
            d = make_node(
                crate::rules::RuleUse::forward(1),
                d,
                crate::derivation::leaf(&format!("w{}", i), cat(&format!("x{}/x{}", i, i + 1))),
            )
            .unwrap();
        }
        assert!(matches!(explore_rewrites(&d, &RuleConfig::default()), Err(OracleError::TooLarge { .. })));
    }

    #[test]
    fn attachment_ambiguity_gives_two_classes() {
        let items: Vec<(String, Category)> = [("say", "s/s"), ("rain", "s"), ("often", "s\\s")]
            .iter()
            .map(|(w, c)| (w.to_string(), cat(c)))
            .collect();
        let ds = enumerate_all(&items, &RuleConfig::default()).unwrap();
        assert_eq!(ds.len(), 2);
        let classes = sem_partition(&ds).unwrap();
        assert_eq!(classes.len(), 2);
        assert_eq!(sem_partition(&ds[..1]).unwrap().len(), 1);
    }
}
