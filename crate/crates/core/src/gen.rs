//! Derivation and category generators for property checks.

use rand::Rng;

use crate::category::{Category, Slash};
use crate::derivation::{leaf, make_node, Derivation};
use crate::rules::{infer_rule, Direction, RuleUse};

/// `x0/x1, x1/x2, ..., x{n-1}/x{n}`: every bracketing is a derivation.
pub fn forward_chain(n: usize) -> Vec<(String, Category)> {
    (0..n)
        .map(|i| {
            let c = Category::forward(Category::atom(&format!("x{}", i)), Category::atom(&format!("x{}", i + 1)));
            (format!("w{}", i), c)
        })
        .collect()
}

/// Mirror image of [`forward_chain`]: `x1\x0, x2\x1, ...` combining by
/// backward composition.
pub fn backward_chain(n: usize) -> Vec<(String, Category)> {
    (0..n)
        .map(|i| {
            let c = Category::backward(Category::atom(&format!("x{}", i + 1)), Category::atom(&format!("x{}", i)));
            (format!("w{}", i), c)
        })
        .collect()
}

/// An unlabelled binary tree shape.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    Leaf,
    Node(Box<Shape>, Box<Shape>),
}

impl Shape {
    pub fn leaves(&self) -> usize {
        match self {
            Shape::Leaf => 1,
            Shape::Node(l, r) => l.leaves() + r.leaves(),
        }
    }

    pub fn left_comb(leaves: usize) -> Shape {
        (1..leaves).fold(Shape::Leaf, |acc, _| Shape::Node(Box::new(acc), Box::new(Shape::Leaf)))
    }

    pub fn right_comb(leaves: usize) -> Shape {
        (1..leaves).fold(Shape::Leaf, |acc, _| Shape::Node(Box::new(Shape::Leaf), Box::new(acc)))
    }
}

/// Every binary tree shape with `leaves` leaves (Catalan many).
pub fn all_shapes(leaves: usize) -> Vec<Shape> {
    assert!(leaves >= 1);
    let mut table: Vec<Vec<Shape>> = vec![Vec::new(), vec![Shape::Leaf]];
    for n in 2..=leaves {
        let mut here = Vec::new();
        for k in 1..n {
            for l in &table[k] {
                for r in &table[n - k] {
                    here.push(Shape::Node(Box::new(l.clone()), Box::new(r.clone())));
                }
            }
        }
        table.push(here);
    }
    table.swap_remove(leaves)
}

pub fn shape_of(d: &Derivation) -> Shape {
    match d.as_node() {
        None => Shape::Leaf,
        Some(n) => Shape::Node(Box::new(shape_of(&n.left)), Box::new(shape_of(&n.right))),
    }
}

/// Builds a derivation of `items` with the given shape, inferring each rule
/// in `direction`. `None` if some node cannot be built.
pub fn build_on_shape(shape: &Shape, items: &[(String, Category)], direction: Direction) -> Option<Derivation> {
    assert_eq!(shape.leaves(), items.len());
    match shape {
        Shape::Leaf => Some(leaf(&items[0].0, items[0].1.clone())),
        Shape::Node(l, r) => {
            let k = l.leaves();
            let left = build_on_shape(l, &items[..k], direction)?;
            let right = build_on_shape(r, &items[k..], direction)?;
            let m = infer_rule(left.cat(), right.cat(), direction)?;
            make_node(m.rule, left, right).ok()
        }
    }
}

/// Every shape over a uniform chain (forward or backward).
pub fn chain_derivations(leaves: usize, direction: Direction) -> Vec<Derivation> {
    let items = match direction {
        Direction::Forward => forward_chain(leaves),
        Direction::Backward => backward_chain(leaves),
    };
    all_shapes(leaves)
        .iter()
        .map(|s| build_on_shape(s, &items, direction).expect("chains build on every shape"))
        .collect()
}

pub fn random_slash<R: Rng>(rng: &mut R) -> Slash {
    if rng.gen_bool(0.5) {
        Slash::Forward
    } else {
        Slash::Backward
    }
}

/// A random category over `atoms` with nesting depth at most `depth`.
pub fn random_category<R: Rng>(rng: &mut R, depth: usize, atoms: &[&str]) -> Category {
    if depth == 0 || rng.gen_bool(0.4) {
        return Category::atom(atoms[rng.gen_range(0..atoms.len())]);
    }
    let res = random_category(rng, depth - 1, atoms);
    let arg = random_category(rng, depth - 1, atoms);
    Category::complex(res, random_slash(rng), arg)
}

/// Random well-formed derivations with mixed directions and degrees, built
/// top-down so every node is a valid rule application by construction.
pub struct DerivationGen<R> {
    rng: R,
    fresh: usize,
    /// Largest composition degree the generator picks.
    pub max_degree: usize,
}

impl<R: Rng> DerivationGen<R> {
    pub fn new(rng: R) -> Self {
        DerivationGen {
            rng,
            fresh: 0,
            max_degree: 2,
        }
    }

    fn fresh_atom(&mut self) -> Category {
        self.fresh += 1;
        Category::atom(&format!("t{}", self.fresh))
    }

    /// The `Y` category shared by a functor and its argument.
    fn link_category(&mut self) -> Category {
        let a = self.fresh_atom();
        if self.rng.gen_bool(0.3) {
            let b = self.fresh_atom();
            let slash = random_slash(&mut self.rng);
            Category::complex(a, slash, b)
        } else {
            a
        }
    }

    /// A random derivation with exactly `internal` internal nodes.
    pub fn derivation(&mut self, internal: usize) -> Derivation {
        let shape = self.random_shape(internal + 1);
        self.on_shape(&shape)
    }

    /// A random labelling of a fixed tree shape.
    pub fn on_shape(&mut self, shape: &Shape) -> Derivation {
        self.fresh = 0;
        let target = {
            let depth = self.rng.gen_range(0..=2);
            random_category(&mut self.rng, depth, &["s", "np", "n"])
        };
        let mut words = 0;
        self.grow(shape, target, &mut words)
    }

    fn random_shape(&mut self, leaves: usize) -> Shape {
        if leaves == 1 {
            return Shape::Leaf;
        }
        let split = self.rng.gen_range(1..leaves);
        Shape::Node(Box::new(self.random_shape(split)), Box::new(self.random_shape(leaves - split)))
    }

    fn grow(&mut self, shape: &Shape, target: Category, words: &mut usize) -> Derivation {
        let (l, r) = match shape {
            Shape::Leaf => {
                let w = format!("w{}", *words);
                *words += 1;
                return leaf(&w, target);
            }
            Shape::Node(l, r) => (l, r),
        };
        let direction = if self.rng.gen_bool(0.5) {
            Direction::Forward
        } else {
            Direction::Backward
        };
        let degree = self.rng.gen_range(0..=self.max_degree.min(target.arity()));
        let (x, zs) = target.peel(degree).expect("degree bounded by arity");
        let y = self.link_category();
        let with_zs = Category::reassemble(y.clone(), &zs);
        let (left_cat, right_cat) = match direction {
            Direction::Forward => (Category::forward(x, y), with_zs),
            Direction::Backward => (with_zs, Category::backward(x, y)),
        };
        let left = self.grow(l, left_cat, words);
        let right = self.grow(r, right_cat, words);
        make_node(RuleUse { direction, degree }, left, right).expect("generated by construction")
    }
}
