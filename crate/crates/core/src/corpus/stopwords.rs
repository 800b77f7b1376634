use std::collections::HashSet;

use super::{tokenize, Vocabulary};

const DEFAULT_LIST: &str = include_str!("stopwords.txt");
const PUNCTUATION: &str = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

/// A set of stop-word tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopList {
    words: HashSet<String>,
}

impl Default for StopList {
    /// Long English stop-word list with punctuation appended. Entries are run
    /// through the tokenizer so contractions contribute their clitic pieces.
    fn default() -> Self {
        let mut list = Self::parse(DEFAULT_LIST);
        list.words.extend(PUNCTUATION.chars().map(String::from));
        list
    }
}

impl StopList {
    /// One entry per line; entries are tokenized, blank lines ignored.
    pub fn parse(text: &str) -> Self {
        let words = text.lines().flat_map(tokenize).collect();
        Self { words }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Vocabulary ids of the stop-words present in `vocab`.
    pub fn ids(&self, vocab: &Vocabulary) -> HashSet<usize> {
        self.words.iter().filter_map(|w| vocab.get(w)).collect()
    }
}
