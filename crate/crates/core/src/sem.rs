//! Applicative semantic terms with generalized composition combinators.
//!
//! `Comp(n, f, g)` stands for `Bⁿ f g`, with `Bⁿ f g z1..zn = f (g z1..zn)`.
//! Two terms of the same category are equivalent when saturating both with
//! the same fresh variables reduces them to identical combinator-free terms.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::rules::RuleUse;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemTerm {
    Const(Arc<str>),
    Var(u32),
    App(Arc<SemTerm>, Arc<SemTerm>),
    /// Degree is always at least 1; degree 0 is plain application.
    Comp(usize, Arc<SemTerm>, Arc<SemTerm>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemError {
    #[error("composition B{degree} is short of {missing} argument(s); category and semantics disagree")]
    ArityMismatch { degree: usize, missing: usize },
}

impl SemTerm {
    pub fn constant(id: &str) -> SemTerm {
        SemTerm::Const(Arc::from(id))
    }

    pub fn app(f: SemTerm, x: SemTerm) -> SemTerm {
        SemTerm::App(Arc::new(f), Arc::new(x))
    }

    pub fn comp(degree: usize, f: SemTerm, g: SemTerm) -> SemTerm {
        assert!(degree >= 1, "composition degree must be at least 1");
        SemTerm::Comp(degree, Arc::new(f), Arc::new(g))
    }

    /// Sum of composition degrees; each reduction step removes exactly one.
    pub fn composition_weight(&self) -> usize {
        match self {
            SemTerm::Const(_) | SemTerm::Var(_) => 0,
            SemTerm::App(f, x) => f.composition_weight() + x.composition_weight(),
            SemTerm::Comp(n, f, g) => n + f.composition_weight() + g.composition_weight(),
        }
    }

    pub fn has_composition(&self) -> bool {
        match self {
            SemTerm::Const(_) | SemTerm::Var(_) => false,
            SemTerm::App(f, x) => f.has_composition() || x.has_composition(),
            SemTerm::Comp(..) => true,
        }
    }

    /// Splits an application spine into its head and arguments.
    pub fn spine(&self) -> (&SemTerm, Vec<&SemTerm>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let SemTerm::App(f, x) = cur {
            args.push(&**x);
            cur = f;
        }
        args.reverse();
        (cur, args)
    }
}

/// Prefix notation: `(john (loves mary))`, `(B1 f g)`, variables as `v1`.
impl fmt::Display for SemTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemTerm::Const(id) => f.write_str(id),
            SemTerm::Var(n) => write!(f, "v{}", n),
            SemTerm::App(..) => {
                let (head, args) = self.spine();
                write!(f, "({}", head)?;
                for a in args {
                    write!(f, " {}", a)?;
                }
                f.write_str(")")
            }
            SemTerm::Comp(n, g, h) => write!(f, "(B{} {} {})", n, g, h),
        }
    }
}

impl fmt::Debug for SemTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Semantics of one rule application. The functor is the `X/Y` or `X\Y`
/// constituent whatever its linear position.
pub fn sem_of_combination(rule: RuleUse, functor: SemTerm, argument: SemTerm) -> SemTerm {
    if rule.degree == 0 {
        SemTerm::app(functor, argument)
    } else {
        SemTerm::comp(rule.degree, functor, argument)
    }
}

/// Deterministic fresh-variable source.
#[derive(Debug, Default)]
struct Fresh {
    next: u32,
}

impl Fresh {
    fn var(&mut self) -> SemTerm {
        self.next += 1;
        SemTerm::Var(self.next)
    }
}

struct Reducer {
    fresh: Fresh,
    steps: usize,
}

impl Reducer {
    /// Head-reduces `head args..`, then reduces each argument. `expand`
    /// allows eta-expansion of an unsaturated composition head, which is
    /// needed for function-typed arguments; at the top level the caller
    /// supplies the arity and a shortfall is an error.
    fn reduce(&mut self, term: &SemTerm, extra: Vec<SemTerm>, expand: bool) -> Result<SemTerm, SemError> {
        let (head, spine_args) = term.spine();
        let mut head = head.clone();
        let mut args: Vec<SemTerm> = spine_args.into_iter().cloned().collect();
        args.extend(extra);
        loop {
            match head {
                SemTerm::App(..) => {
                    let (h, more) = head.spine();
                    let mut new_args: Vec<SemTerm> = more.into_iter().cloned().collect();
                    let h = h.clone();
                    new_args.append(&mut args);
                    args = new_args;
                    head = h;
                }
                SemTerm::Comp(n, ref f, ref g) => {
                    if args.len() < n {
                        if !expand {
                            return Err(SemError::ArityMismatch {
                                degree: n,
                                missing: n - args.len(),
                            });
                        }
                        while args.len() < n {
                            args.push(self.fresh.var());
                        }
                    }
                    // Bⁿ f g z1..zn rest = f (g z1..zn) rest, one step per zi
                    self.steps += n;
                    let rest = args.split_off(n);
                    let inner = args
                        .into_iter()
                        .fold((**g).clone(), SemTerm::app);
                    let f = (**f).clone();
                    args = std::iter::once(inner).chain(rest).collect();
                    head = f;
                }
                SemTerm::Const(_) | SemTerm::Var(_) => break,
            }
        }
        let mut out = head;
        for a in args {
            let reduced = self.reduce(&a, Vec::new(), true)?;
            out = SemTerm::app(out, reduced);
        }
        Ok(out)
    }
}

/// Applies `term` to `arity` fresh variables `v1..` and eliminates every
/// composition. Also returns the number of reduction steps taken.
pub fn saturate_reduce_counting(term: &SemTerm, arity: usize) -> Result<(SemTerm, usize), SemError> {
    let mut r = Reducer {
        fresh: Fresh::default(),
        steps: 0,
    };
    let vars: Vec<SemTerm> = (0..arity).map(|_| r.fresh.var()).collect();
    let out = r.reduce(term, vars, false)?;
    debug_assert!(!out.has_composition());
    Ok((out, r.steps))
}

pub fn saturate_reduce(term: &SemTerm, arity: usize) -> Result<SemTerm, SemError> {
    saturate_reduce_counting(term, arity).map(|(t, _)| t)
}

/// Truth-conditional equivalence at a given category arity.
pub fn sem_equiv(a: &SemTerm, b: &SemTerm, arity: usize) -> Result<bool, SemError> {
    if a == b {
        return Ok(true);
    }
    Ok(saturate_reduce(a, arity)? == saturate_reduce(b, arity)?)
}
