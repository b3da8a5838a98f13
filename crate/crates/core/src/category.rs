//! CCG categories: atoms closed under `/` and `\`.
//!
//! Notation is left-associative, so `s\np/pp` is `(s\np)/pp`. Parentheses
//! override grouping and whitespace is ignored.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Direction of a slash. `X/Y` seeks `Y` to the right, `X\Y` to the left.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Slash {
    #[serde(rename = "/")]
    Forward,
    #[serde(rename = "\\")]
    Backward,
}

impl Slash {
    pub fn symbol(self) -> char {
        match self {
            Slash::Forward => '/',
            Slash::Backward => '\\',
        }
    }
}

impl fmt::Display for Slash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Atom(Arc<str>),
    Complex(Arc<Category>, Slash, Arc<Category>),
}

/// One outer argument of a category, as peeled by [`Category::decompose`].
pub type Arg = (Slash, Category);

impl Category {
    /// Builds an atom. Panics on an empty name; use [`parse_category`] for
    /// untrusted input.
    pub fn atom(name: &str) -> Category {
        assert!(!name.is_empty(), "atom names must be non-empty");
        Category::Atom(Arc::from(name))
    }

    pub fn complex(result: Category, slash: Slash, arg: Category) -> Category {
        Category::Complex(Arc::new(result), slash, Arc::new(arg))
    }

    pub fn forward(result: Category, arg: Category) -> Category {
        Category::complex(result, Slash::Forward, arg)
    }

    pub fn backward(result: Category, arg: Category) -> Category {
        Category::complex(result, Slash::Backward, arg)
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Category::Atom(_))
    }

    /// `(result, slash, argument)` for complex categories.
    pub fn as_functor(&self) -> Option<(&Category, Slash, &Category)> {
        match self {
            Category::Atom(_) => None,
            Category::Complex(res, slash, arg) => Some((res, *slash, arg)),
        }
    }

    /// The outermost slash, if any.
    pub fn outer_slash(&self) -> Option<Slash> {
        self.as_functor().map(|(_, s, _)| s)
    }

    /// Number of outer arguments, i.e. the length of `decompose().1`.
    pub fn arity(&self) -> usize {
        let mut n = 0;
        let mut cur = self;
        while let Category::Complex(res, _, _) = cur {
            n += 1;
            cur = res;
        }
        n
    }

    /// Peels every outer argument. Arguments are listed outermost first; the
    /// target is the innermost result.
    pub fn decompose(&self) -> (Category, Vec<Arg>) {
        self.peel(self.arity()).expect("arity bounds the peel depth")
    }

    /// Peels exactly `n` outer arguments, outermost first. `None` when the
    /// category has fewer than `n` arguments.
    pub fn peel(&self, n: usize) -> Option<(Category, Vec<Arg>)> {
        let mut args = Vec::with_capacity(n);
        let mut cur = self;
        for _ in 0..n {
            match cur {
                Category::Atom(_) => return None,
                Category::Complex(res, slash, arg) => {
                    args.push((*slash, (**arg).clone()));
                    cur = res;
                }
            }
        }
        Some((cur.clone(), args))
    }

    /// Inverse of [`Category::peel`]: re-applies `args` (outermost first) to
    /// `target`.
    pub fn reassemble(target: Category, args: &[Arg]) -> Category {
        args.iter()
            .rev()
            .fold(target, |acc, (slash, arg)| Category::complex(acc, *slash, arg.clone()))
    }

    /// `Some(X)` when the category is a post-head modifier `X\X`.
    pub fn endocentric_target(&self) -> Option<&Category> {
        match self {
            Category::Complex(res, Slash::Backward, arg) if res == arg => Some(res),
            _ => None,
        }
    }

    /// Total number of atoms; a cheap size measure for generators.
    pub fn size(&self) -> usize {
        match self {
            Category::Atom(_) => 1,
            Category::Complex(res, _, arg) => res.size() + arg.size(),
        }
    }
}

/// Parses category notation (see module docs).
pub fn parse_category(text: &str) -> Result<Category, CategoryParseError> {
    text.parse()
}

/// Canonical minimal-parenthesis rendering.
pub fn format_category(cat: &Category) -> String {
    cat.to_string()
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Category::Atom(name) => f.write_str(name),
            Category::Complex(res, slash, arg) => {
                // The result never needs parentheses: left-associativity
                // recovers it. A complex argument always does.
                write!(f, "{}{}", res, slash)?;
                if arg.is_atom() {
                    write!(f, "{}", arg)
                } else {
                    write!(f, "({})", arg)
                }
            }
        }
    }
}

impl fmt::Debug for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Category({})", self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CategoryParseError {
    #[error("empty category")]
    Empty,
    #[error("unbalanced parentheses at position {0}")]
    Unbalanced(usize),
    #[error("missing category at position {0}")]
    MissingOperand(usize),
    #[error("illegal character {ch:?} at position {pos}")]
    IllegalChar { ch: char, pos: usize },
}

impl CategoryParseError {
    pub fn position(&self) -> Option<usize> {
        match self {
            CategoryParseError::Empty => None,
            CategoryParseError::Unbalanced(p) | CategoryParseError::MissingOperand(p) => Some(*p),
            CategoryParseError::IllegalChar { pos, .. } => Some(*pos),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Atom(String),
    Slash(Slash),
    Open,
    Close,
}

pub(crate) fn is_atom_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '\'' || c == '.'
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, CategoryParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '/' => {
                chars.next();
                tokens.push((pos, Token::Slash(Slash::Forward)));
            }
            '\\' => {
                chars.next();
                tokens.push((pos, Token::Slash(Slash::Backward)));
            }
            '(' => {
                chars.next();
                tokens.push((pos, Token::Open));
            }
            ')' => {
                chars.next();
                tokens.push((pos, Token::Close));
            }
            c if is_atom_char(c) => {
                let mut name = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if !is_atom_char(c) {
                        break;
                    }
                    name.push(c);
                    chars.next();
                }
                tokens.push((pos, Token::Atom(name)));
            }
            ch => return Err(CategoryParseError::IllegalChar { ch, pos }),
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    next: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.next).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.tokens.get(self.next).map_or(self.end, |(p, _)| *p)
    }

    fn category(&mut self) -> Result<Category, CategoryParseError> {
        let mut acc = self.primary()?;
        while let Some(Token::Slash(slash)) = self.peek() {
            let slash = *slash;
            self.next += 1;
            let arg = self.primary()?;
            acc = Category::complex(acc, slash, arg);
        }
        Ok(acc)
    }

    fn primary(&mut self) -> Result<Category, CategoryParseError> {
        let pos = self.pos();
        match self.tokens.get(self.next).cloned() {
            Some((_, Token::Atom(name))) => {
                self.next += 1;
                Ok(Category::Atom(Arc::from(name.as_str())))
            }
            Some((open_pos, Token::Open)) => {
                self.next += 1;
                let inner = self.category()?;
                match self.peek() {
                    Some(Token::Close) => {
                        self.next += 1;
                        Ok(inner)
                    }
                    _ => Err(CategoryParseError::Unbalanced(open_pos)),
                }
            }
            _ => Err(CategoryParseError::MissingOperand(pos)),
        }
    }
}

impl FromStr for Category {
    type Err = CategoryParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let tokens = tokenize(text)?;
        if tokens.is_empty() {
            return Err(CategoryParseError::Empty);
        }
        let mut parser = Parser {
            tokens,
            next: 0,
            end: text.len(),
        };
        let cat = parser.category()?;
        match parser.tokens.get(parser.next) {
            None => Ok(cat),
            Some((pos, Token::Close)) => Err(CategoryParseError::Unbalanced(*pos)),
            Some((pos, _)) => Err(CategoryParseError::MissingOperand(*pos)),
        }
    }
}

impl Serialize for Category {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Category {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Shorthand used throughout tests and bundled data. Panics on bad notation.
pub fn cat(text: &str) -> Category {
    text.parse()
        .unwrap_or_else(|e| panic!("bad category {:?}: {}", text, e))
}
