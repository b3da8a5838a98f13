//! Small grammars shipped with the library, each with test sentences.

use crate::lexicon::{parse_corpus, Lexicon};

pub struct BundledGrammar {
    pub name: &'static str,
    pub source: &'static str,
    pub sentences: &'static [&'static str],
}

impl BundledGrammar {
    pub fn lexicon(&self) -> Lexicon {
        Lexicon::parse(self.source).unwrap_or_else(|e| panic!("bundled lexicon {}: {}", self.name, e))
    }

    pub fn tokenized(&self) -> Vec<Vec<String>> {
        self.sentences
            .iter()
            .map(|s| s.split_whitespace().map(str::to_string).collect())
            .collect()
    }
}

pub const FLOWERS: BundledGrammar = BundledGrammar {
    name: "flowers",
    source: include_str!("../lexicons/flowers.lex"),
    sentences: &["the flowers sent", "the flowers sent for the patient"],
};

pub const REDUCED: BundledGrammar = BundledGrammar {
    name: "reduced",
    source: include_str!("../lexicons/reduced.lex"),
    sentences: &["the flowers sent", "the flowers sent for the patient died"],
};

pub const WHOSE: BundledGrammar = BundledGrammar {
    name: "whose",
    source: include_str!("../lexicons/whose.lex"),
    sentences: &["whose cat did fred find", "did fred find whose cat"],
};

pub const MADLY: BundledGrammar = BundledGrammar {
    name: "madly",
    source: include_str!("../lexicons/madly.lex"),
    sentences: &["john loves mary madly", "john loves mary madly madly"],
};

pub const BCBC: BundledGrammar = BundledGrammar {
    name: "bcbc",
    source: include_str!("../lexicons/bcbc.lex"),
    sentences: &["p q r t u", "p q r t"],
};

pub const REANALYSIS: BundledGrammar = BundledGrammar {
    name: "reanalysis",
    source: include_str!("../lexicons/reanalysis.lex"),
    sentences: &["p q r z", "p q r"],
};

pub const ATTACHMENT: BundledGrammar = BundledGrammar {
    name: "attachment",
    source: include_str!("../lexicons/attachment.lex"),
    sentences: &["say rain often", "say say rain often"],
};

pub const THINKING: BundledGrammar = BundledGrammar {
    name: "thinking",
    source: include_str!("../lexicons/thinking.lex"),
    sentences: &["john was thinking that bill had left", "bill had left"],
};

pub const INSULTS: BundledGrammar = BundledGrammar {
    name: "insults",
    source: include_str!("../lexicons/insults.lex"),
    sentences: &[
        "the insults hurt the new students",
        "the shouts hurt the young teacher",
        "they man the boats",
        "the old man saw the boats",
    ],
};

/// Training sentences for the insults grammar.
pub const INSULTS_CORPUS: &str = include_str!("../lexicons/insults.corpus");

pub fn insults_corpus() -> Vec<Vec<String>> {
    parse_corpus(INSULTS_CORPUS)
}

pub fn all() -> [&'static BundledGrammar; 9] {
    [&FLOWERS, &REDUCED, &WHOSE, &MADLY, &BCBC, &REANALYSIS, &ATTACHMENT, &THINKING, &INSULTS]
}

pub fn by_name(name: &str) -> Option<&'static BundledGrammar> {
    all().into_iter().find(|g| g.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_grammar_loads_and_covers_its_sentences() {
        for g in all() {
            let lex = g.lexicon();
            for s in g.tokenized() {
                assert!(s.len() <= 8, "{}", g.name);
                for w in &s {
                    assert!(lex.entries(w).is_some(), "{}: {}", g.name, w);
                }
            }
        }
        assert!(insults_corpus().len() >= 20);
        assert!(by_name("whose").is_some());
    }
}
