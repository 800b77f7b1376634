use std::collections::HashMap;

use super::DialoguePair;
use crate::{Error, Result};

pub const UNK: usize = 0;
pub const BOS: usize = 1;
pub const EOS: usize = 2;
/// Empty source word for lexical alignment.
pub const NULL: usize = 3;

const RESERVED: [&str; 4] = ["<unk>", "<s>", "</s>", "<null>"];

/// Dense token ↔ id map with unigram counts.
///
/// Ids `0..4` are reserved (`UNK`, `BOS`, `EOS`, `NULL`); regular tokens
/// follow in order of decreasing count, ties by surface form. Tokens dropped
/// by the `min_count` threshold are folded into the `UNK` count, so the
/// counts always sum to `total_tokens`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    counts: Vec<u64>,
    total: u64,
}

impl Vocabulary {
    /// Counts every source and target token of `pairs`.
    pub fn build(pairs: &[DialoguePair], min_count: u64) -> Result<Self> {
        if min_count == 0 {
            return Err(Error::InvalidConfig("min_count must be >= 1".into()));
        }
        if pairs.is_empty() {
            return Err(Error::Empty("corpus"));
        }
        let mut raw: HashMap<&str, u64> = HashMap::new();
        for p in pairs {
            for t in p.source.iter().chain(&p.target) {
                *raw.entry(t.as_str()).or_default() += 1;
            }
        }
        let mut unk = 0;
        let mut kept: Vec<(&str, u64)> = Vec::new();
        for (tok, c) in raw {
            if c < min_count || RESERVED.contains(&tok) {
                unk += c;
            } else {
                kept.push((tok, c));
            }
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let mut entries: Vec<(String, u64)> = RESERVED
            .iter()
            .enumerate()
            .map(|(i, s)| (s.to_string(), if i == UNK { unk } else { 0 }))
            .collect();
        entries.extend(kept.into_iter().map(|(t, c)| (t.to_owned(), c)));
        Self::from_entries(entries)
    }

    fn from_entries(entries: Vec<(String, u64)>) -> Result<Self> {
        let mut tokens = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        let mut index = HashMap::with_capacity(entries.len());
        for (i, (tok, c)) in entries.into_iter().enumerate() {
            if index.insert(tok.clone(), i).is_some() {
                return Err(Error::parse(i + 2, format!("duplicate token {tok:?}")));
            }
            tokens.push(tok);
            counts.push(c);
        }
        let total = counts.iter().sum();
        if total == 0 {
            return Err(Error::Empty("vocabulary counts"));
        }
        Ok(Self {
            tokens,
            index,
            counts,
            total,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Id of `token`, or `UNK`.
    pub fn id(&self, token: &str) -> usize {
        self.get(token).unwrap_or(UNK)
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn count(&self, id: usize) -> u64 {
        self.counts[id]
    }

    pub fn total_tokens(&self) -> u64 {
        self.total
    }

    /// Unigram probability `count / total_tokens`.
    pub fn unigram(&self, id: usize) -> f64 {
        self.counts.get(id).map_or(0.0, |&c| c as f64 / self.total as f64)
    }

    pub fn is_reserved(id: usize) -> bool {
        id < RESERVED.len()
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    pub fn decode(&self, ids: &[usize]) -> Vec<String> {
        ids.iter().map(|&i| self.tokens[i].clone()).collect()
    }

    /// `VOCAB v1 <V> <total_tokens>` followed by `token<TAB>count` lines in id order.
    pub fn to_text(&self) -> String {
        let mut out = format!("VOCAB v1 {} {}\n", self.len(), self.total);
        for (t, c) in self.tokens.iter().zip(&self.counts) {
            out.push_str(&format!("{t}\t{c}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (v, total) = match fields.as_slice() {
            ["VOCAB", "v1", v, total] => (
                v.parse::<usize>().map_err(|e| Error::parse(1, e.to_string()))?,
                total.parse::<u64>().map_err(|e| Error::parse(1, e.to_string()))?,
            ),
            _ => return Err(Error::parse(1, "expected `VOCAB v1 <V> <total_tokens>`")),
        };
        let mut entries = Vec::with_capacity(v);
        for (i, line) in lines.enumerate() {
            let (tok, c) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(i + 2, "expected token<TAB>count"))?;
            let c = c.parse().map_err(|_| Error::parse(i + 2, "bad count"))?;
            entries.push((tok.to_owned(), c));
        }
        if entries.len() != v || entries.len() < RESERVED.len() {
            return Err(Error::parse(1, format!("header says {v} entries, found {}", entries.len())));
        }
        for (i, r) in RESERVED.iter().enumerate() {
            if entries[i].0 != *r {
                return Err(Error::parse(i + 2, format!("expected reserved token {r}")));
            }
        }
        let vocab = Self::from_entries(entries)?;
        if vocab.total != total {
            return Err(Error::parse(1, "total_tokens does not match counts"));
        }
        Ok(vocab)
    }
}
