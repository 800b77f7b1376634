use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use crate::corpus::{Vocabulary, NULL};
use crate::{Error, Result};

/// Lexical translation table `t(target | source)` from IBM Model 1.
///
/// Only pairs that co-occurred in training are stored. Source words without
/// a row (never seen on the source side) fall back to the NULL row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LexicalTable {
    rows: BTreeMap<usize, Vec<(usize, f64)>>,
}

/// EM for IBM Model 1 on `(source, target)` id sequences. Every target
/// position may also align to NULL. The first E-step uses a uniform table
/// over the target vocabulary.
pub fn train_ibm1(pairs: &[(Vec<usize>, Vec<usize>)], iterations: usize) -> Result<LexicalTable> {
    let targets: HashSet<usize> = pairs.iter().flat_map(|p| p.1.iter().copied()).collect();
    if targets.is_empty() {
        return Err(Error::Empty("IBM Model 1 target side"));
    }
    if iterations == 0 {
        return Err(Error::InvalidConfig("EM needs at least one iteration".into()));
    }
    let uniform = 1.0 / targets.len() as f64;
    let mut table: Option<HashMap<(usize, usize), f64>> = None;
    let mut src = Vec::new();
    for _ in 0..iterations {
        let t = |e: usize, f: usize| table.as_ref().map_or(uniform, |m| m[&(e, f)]);
        let mut counts: HashMap<(usize, usize), f64> = HashMap::new();
        let mut totals: HashMap<usize, f64> = HashMap::new();
        for (x, y) in pairs {
            src.clear();
            src.push(NULL);
            src.extend_from_slice(x);
            for &f in y {
                let denom: f64 = src.iter().map(|&e| t(e, f)).sum();
                for &e in &src {
                    let c = t(e, f) / denom;
                    *counts.entry((e, f)).or_default() += c;
                    *totals.entry(e).or_default() += c;
                }
            }
        }
        for ((e, _), v) in counts.iter_mut() {
            *v /= totals[e];
        }
        table = Some(counts);
    }
    let mut rows: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for ((e, f), p) in table.unwrap_or_default() {
        rows.entry(e).or_default().push((f, p));
    }
    rows.values_mut().for_each(|r| r.sort_by_key(|x| x.0));
    Ok(LexicalTable { rows })
}

impl LexicalTable {
    /// Stored row for `source`, or the NULL row when there is none.
    pub fn row(&self, source: usize) -> &[(usize, f64)] {
        self.rows
            .get(&source)
            .or_else(|| self.rows.get(&NULL))
            .map_or(&[], Vec::as_slice)
    }

    pub fn has_row(&self, source: usize) -> bool {
        self.rows.contains_key(&source)
    }

    pub fn prob(&self, source: usize, target: usize) -> f64 {
        let row = self.row(source);
        row.binary_search_by_key(&target, |x| x.0).map_or(0.0, |i| row[i].1)
    }

    /// One `source<TAB>target<TAB>prob` line per stored entry.
    pub fn to_text(&self, vocab: &Vocabulary) -> String {
        let mut out = String::new();
        for (&e, row) in &self.rows {
            for &(f, p) in row {
                let _ = writeln!(out, "{}\t{}\t{:e}", vocab.token(e), vocab.token(f), p);
            }
        }
        out
    }

    pub fn from_text(text: &str, vocab: &Vocabulary) -> Result<Self> {
        let mut rows: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let ln = i + 1;
            let mut it = line.split('\t');
            let (Some(e), Some(f), Some(p), None) = (it.next(), it.next(), it.next(), it.next()) else {
                return Err(Error::parse(ln, "expected source<TAB>target<TAB>prob"));
            };
            let id = |t: &str| vocab.get(t).ok_or_else(|| Error::parse(ln, format!("token {t:?} not in vocabulary")));
            let p: f64 = p.parse().map_err(|_| Error::parse(ln, "bad probability"))?;
            if !(0.0..=1.0 + 1e-9).contains(&p) {
                return Err(Error::parse(ln, "probability out of range"));
            }
            rows.entry(id(e)?).or_default().push((id(f)?, p));
        }
        if rows.is_empty() {
            return Err(Error::Empty("lexical table"));
        }
        rows.values_mut().for_each(|r| r.sort_by_key(|x| x.0));
        Ok(Self { rows })
    }
}
