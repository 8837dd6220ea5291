//! Lexical database, lemmatization and the noun/adjective term dictionary.
//!
//! The database is read from files in the WordNet 3.0 layout
//! (`index.<pos>`, `data.<pos>`, `<pos>.exc`). Only nouns and adjectives are
//! loaded; adjective satellites are folded into adjectives.

mod dictionary;
mod wordnet;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dictionary::{build_dictionary, StopWords, Term, TermDictionary};
pub use wordnet::{parse_lexical_database, DATABASE_FILES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pos {
    Noun,
    Adjective,
}

impl Pos {
    pub const ALL: [Pos; 2] = [Pos::Noun, Pos::Adjective];

    fn slot(self) -> usize {
        match self {
            Pos::Noun => 0,
            Pos::Adjective => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "noun",
            Pos::Adjective => "adjective",
        }
    }

    /// Suffix detachment rules, tried in order.
    fn detachment_rules(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Pos::Noun => &[
                ("s", ""),
                ("ses", "s"),
                ("xes", "x"),
                ("zes", "z"),
                ("ches", "ch"),
                ("shes", "sh"),
                ("men", "man"),
                ("ies", "y"),
            ],
            Pos::Adjective => &[("er", ""), ("est", ""), ("er", "e"), ("est", "e")],
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noun" | "n" => Ok(Pos::Noun),
            "adjective" | "adj" | "a" | "s" => Ok(Pos::Adjective),
            other => Err(Error::Validation(format!("unknown part of speech `{other}`"))),
        }
    }
}

/// A synset in the lexical database, identified by part of speech and byte offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SenseId {
    pub pos: Pos,
    pub offset: u64,
}

impl SenseId {
    pub fn new(pos: Pos, offset: u64) -> Self {
        SenseId { pos, offset }
    }
}

/// Noun and adjective lemmas with their senses, irregular forms and antonymy.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: [HashMap<String, Vec<SenseId>>; 2],
    exceptions: [HashMap<String, String>; 2],
    antonyms: HashMap<SenseId, Vec<SenseId>>,
    antonym_pairs: HashSet<(SenseId, SenseId)>,
}

impl Lexicon {
    /// Assemble a lexicon from its parts.
    ///
    /// `senses` is the set of synsets present in the database; every sense in
    /// `entries` and `antonym_pairs` must belong to it. Exceptions whose base
    /// forms are all missing from `entries` are dropped; for the rest the
    /// first base present is kept.
    pub fn from_parts(
        entries: impl IntoIterator<Item = (String, Pos, Vec<SenseId>)>,
        exceptions: impl IntoIterator<Item = (String, Pos, Vec<String>)>,
        antonym_pairs: impl IntoIterator<Item = (SenseId, SenseId)>,
        senses: &HashSet<SenseId>,
    ) -> Result<Self> {
        let mut lex = Lexicon::default();
        for (lemma, pos, ids) in entries {
            if let Some(bad) = ids.iter().find(|s| !senses.contains(s)) {
                return Err(Error::Validation(format!(
                    "lemma `{lemma}` references unknown sense {}:{}",
                    bad.pos, bad.offset
                )));
            }
            if ids.is_empty() {
                return Err(Error::Validation(format!("lemma `{lemma}` has no senses")));
            }
            let slot = lex.entries[pos.slot()].entry(lemma).or_default();
            for id in ids {
                if !slot.contains(&id) {
                    slot.push(id);
                }
            }
        }
        for (form, pos, bases) in exceptions {
            let map = &lex.entries[pos.slot()];
            if let Some(base) = bases.into_iter().find(|b| map.contains_key(b)) {
                lex.exceptions[pos.slot()].entry(form).or_insert(base);
            }
        }
        for (a, b) in antonym_pairs {
            for s in [a, b] {
                if !senses.contains(&s) {
                    return Err(Error::Validation(format!(
                        "antonym pair references unknown sense {}:{}",
                        s.pos, s.offset
                    )));
                }
            }
            let key = if a <= b { (a, b) } else { (b, a) };
            if lex.antonym_pairs.insert(key) {
                lex.antonyms.entry(a).or_default().push(b);
                if a != b {
                    lex.antonyms.entry(b).or_default().push(a);
                }
            }
        }
        Ok(lex)
    }

    pub fn contains(&self, lemma: &str, pos: Pos) -> bool {
        self.entries[pos.slot()].contains_key(lemma)
    }

    pub fn senses(&self, lemma: &str, pos: Pos) -> &[SenseId] {
        self.entries[pos.slot()]
            .get(lemma)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn exception(&self, form: &str, pos: Pos) -> Option<&str> {
        self.exceptions[pos.slot()].get(form).map(String::as_str)
    }

    pub fn antonyms_of(&self, sense: SenseId) -> &[SenseId] {
        self.antonyms.get(&sense).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_antonym_pair(&self, a: SenseId, b: SenseId) -> bool {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.antonym_pairs.contains(&key)
    }

    /// Unordered antonym pairs, each stored once with the smaller sense first.
    pub fn antonym_pairs(&self) -> impl Iterator<Item = &(SenseId, SenseId)> {
        self.antonym_pairs.iter()
    }

    pub fn lemma_count(&self, pos: Pos) -> usize {
        self.entries[pos.slot()].len()
    }

    pub fn lemmas(&self, pos: Pos) -> impl Iterator<Item = &str> {
        self.entries[pos.slot()].keys().map(String::as_str)
    }

    pub fn exception_count(&self, pos: Pos) -> usize {
        self.exceptions[pos.slot()].len()
    }

    /// Base form of `word` for `pos`, or `None` when it is not a dictionary word.
    ///
    /// The irregular-form list is consulted first, then the word itself, then
    /// the suffix detachment rules in order; the first candidate present in
    /// the lexicon wins.
    pub fn lemmatize(&self, word: &str, pos: Pos) -> Option<&str> {
        if let Some(base) = self.exception(word, pos) {
            return Some(base);
        }
        let map = &self.entries[pos.slot()];
        if let Some((lemma, _)) = map.get_key_value(word) {
            return Some(lemma);
        }
        let mut candidate = String::with_capacity(word.len() + 2);
        for (suffix, replacement) in pos.detachment_rules() {
            if let Some(stem) = word.strip_suffix(suffix) {
                if stem.is_empty() {
                    continue;
                }
                candidate.clear();
                candidate.push_str(stem);
                candidate.push_str(replacement);
                if let Some((lemma, _)) = map.get_key_value(candidate.as_str()) {
                    return Some(lemma);
                }
            }
        }
        None
    }

    /// Lemmatize as a noun, falling back to adjective.
    pub fn lemmatize_token(&self, word: &str) -> Option<(&str, Pos)> {
        Pos::ALL
            .into_iter()
            .find_map(|pos| self.lemmatize(word, pos).map(|l| (l, pos)))
    }
}
