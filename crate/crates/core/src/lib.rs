//! Incremental CCG parsing over parallel analyses.
//!
//! The parser keeps maximally left-branching derivations and, when a
//! post-head modifier arrives, rewrites the previous constituent into its
//! right-branching equivalent so that every attachment site sits on the
//! right frontier.

pub mod bundled;
pub mod category;
pub mod check;
pub mod config;
pub mod derivation;
pub mod gen;
pub mod lexicon;
pub mod oracle;
pub mod parser;
pub mod rewrite;
pub mod rules;
pub mod sem;
pub mod viability;

pub use category::{cat, format_category, parse_category, Category, Slash};
pub use config::EngineConfig;
pub use lexicon::{load_lexicon, Lexicon, LexiconError};
pub use parser::{parse, Analysis, ParseError, ParseMode, ParsePolicy, ParseResult, TraceEvent, TraceKind};
pub use derivation::{leaf, make_node, parse_bracketed, Branch, Derivation, Position};
pub use rewrite::{check_confluence, contract, find_redexes, normalize, RewriteReport, RewriteStrategy};
pub use rules::{apply_rule, enumerate_combinations, Direction, RuleConfig, RuleUse};
pub use sem::{saturate_reduce, sem_equiv, sem_of_combination, SemTerm};
pub use viability::{train, ViabilityModel};
