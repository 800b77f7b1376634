//! Dialogue pairs, tokenization, vocabulary and length buckets.

mod bucket;
mod stopwords;
mod tokenize;
mod vocab;

pub use bucket::{bucket_split, Bucket, BucketRange, BucketSpec};
pub use stopwords::StopList;
pub use tokenize::tokenize;
pub use vocab::{Vocabulary, BOS, EOS, NULL, UNK};

use crate::{Error, Result};

/// A source utterance and its response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialoguePair {
    pub source: Vec<String>,
    pub target: Vec<String>,
}

impl DialoguePair {
    pub fn new(source: Vec<String>, target: Vec<String>) -> Result<Self> {
        if source.is_empty() || target.is_empty() {
            return Err(Error::Empty("dialogue pair side"));
        }
        Ok(Self { source, target })
    }

    /// Splits both sides on whitespace; pre-tokenized input.
    pub fn from_tokenized(source: &str, target: &str) -> Result<Self> {
        Self::new(split_ws(source), split_ws(target))
    }

    pub fn from_raw(source: &str, target: &str) -> Result<Self> {
        Self::new(tokenize(source), tokenize(target))
    }
}

fn split_ws(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_owned).collect()
}

/// Parses a pairs file: one `source<TAB>target` per line.
///
/// Blank lines are skipped. With `raw`, each side goes through [`tokenize`];
/// otherwise the sides are taken as space-separated tokens.
pub fn parse_pairs(text: &str, raw: bool) -> Result<Vec<DialoguePair>> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (src, tgt) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(i + 1, "expected source<TAB>target"))?;
        let pair = if raw {
            DialoguePair::from_raw(src, tgt)
        } else {
            DialoguePair::from_tokenized(src, tgt)
        };
        pairs.push(pair.map_err(|e| Error::parse(i + 1, e.to_string()))?);
    }
    Ok(pairs)
}

/// Inverse of [`parse_pairs`] for pre-tokenized output.
pub fn format_pairs(pairs: &[DialoguePair]) -> String {
    let mut out = String::new();
    for p in pairs {
        out.push_str(&p.source.join(" "));
        out.push('\t');
        out.push_str(&p.target.join(" "));
        out.push('\n');
    }
    out
}
