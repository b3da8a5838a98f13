//! Engine settings, read from TOML.
//!
//! ```toml
//! policy = "eager"
//! reveal = true
//! goals = ["s", "q"]
//! viability_model = "model.tsv"
//! threshold = 3
//!
//! [rules]
//! max_degree = 2
//! blocked = ["<2"]
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::category::Category;
use crate::oracle::{MAX_ENUMERATION_LEN, MAX_EXPLORATION_SIZE};
use crate::parser::{ParseMode, ParsePolicy};
use crate::rules::RuleConfig;
use crate::viability::{ViabilityError, ViabilityModel, DEFAULT_K, DEFAULT_THRESHOLD};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub rules: RuleConfig,
    pub policy: ParseMode,
    pub reveal: bool,
    pub endocentric_only: bool,
    /// Overrides the lexicon's goals when set.
    pub goals: Option<Vec<Category>>,
    pub viability_model: Option<PathBuf>,
    /// Signature length used when training.
    pub k: usize,
    /// Failures needed before a never-successful signature is filtered.
    pub threshold: u64,
    pub max_enumeration_len: usize,
    pub max_exploration_size: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            rules: RuleConfig::default(),
            policy: ParseMode::Exhaustive,
            reveal: false,
            endocentric_only: true,
            goals: None,
            viability_model: None,
            k: DEFAULT_K,
            threshold: DEFAULT_THRESHOLD,
            max_enumeration_len: MAX_ENUMERATION_LEN,
            max_exploration_size: MAX_EXPLORATION_SIZE,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad configuration: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("inconsistent configuration: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Model(#[from] ViabilityError),
}

impl EngineConfig {
    pub fn from_toml(text: &str) -> Result<EngineConfig, ConfigError> {
        let c: EngineConfig = toml::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<EngineConfig, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        EngineConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.reveal && self.policy != ParseMode::Eager {
            return Err(ConfigError::Inconsistent("reveal requires policy = \"eager\"".into()));
        }
        if self.k == 0 {
            return Err(ConfigError::Inconsistent("k must be at least 1".into()));
        }
        if self.max_enumeration_len > MAX_ENUMERATION_LEN || self.max_exploration_size > MAX_EXPLORATION_SIZE {
            return Err(ConfigError::Inconsistent(format!(
                "guards may only be tightened (enumeration <= {}, exploration <= {})",
                MAX_ENUMERATION_LEN, MAX_EXPLORATION_SIZE
            )));
        }
        Ok(())
    }

    /// The parse policy these settings describe, loading the viability
    /// model if one is named. The model keeps its own `k`; the threshold
    /// comes from here.
    pub fn parse_policy(&self) -> Result<ParsePolicy, ConfigError> {
        self.validate()?;
        let viability = match &self.viability_model {
            None => None,
            Some(path) => {
                let mut m = ViabilityModel::load(path)?;
                m.threshold = self.threshold;
                Some(m)
            }
        };
        Ok(ParsePolicy {
            mode: self.policy,
            reveal: self.reveal,
            endocentric_only: self.endocentric_only,
            viability,
            rules: self.rules.clone(),
            goals: self.goals.as_ref().map(|g| g.iter().cloned().collect()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::cat;
    use crate::rules::RuleUse;

    #[test]
    fn defaults_from_empty_file() {
        assert_eq!(EngineConfig::from_toml("").unwrap(), EngineConfig::default());
    }

    #[test]
    fn reads_rules_and_policy() {
        let c = EngineConfig::from_toml(
            "policy = \"eager\"\nreveal = true\ngoals = [\"s\", \"q\"]\n[rules]\nmax_degree = 2\nblocked = [\"<2\"]\n",
        )
        .unwrap();
        assert_eq!(c.policy, ParseMode::Eager);
        assert_eq!(c.rules.max_degree, 2);
        assert!(c.rules.blocked.contains(&RuleUse::backward(2)));
        assert_eq!(c.goals, Some(vec![cat("s"), cat("q")]));
        let p = c.parse_policy().unwrap();
        assert!(p.reveal);
    }

    #[test]
    fn reveal_needs_eager() {
        assert!(matches!(
            EngineConfig::from_toml("reveal = true"),
            Err(ConfigError::Inconsistent(_))
        ));
    }

    #[test]
    fn unknown_keys_and_loose_guards_are_rejected() {
        assert!(matches!(EngineConfig::from_toml("speed = 3"), Err(ConfigError::Toml(_))));
        assert!(EngineConfig::from_toml("max_enumeration_len = 50").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let c = EngineConfig {
            policy: ParseMode::Eager,
            reveal: true,
            goals: Some(vec![cat("s\\np")]),
            rules: RuleConfig::with_max_degree(1).block(RuleUse::forward(1)),
            ..EngineConfig::default()
        };
        assert_eq!(EngineConfig::from_toml(&c.to_toml()).unwrap(), c);
    }
}
