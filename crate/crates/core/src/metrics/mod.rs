//! Automatic response metrics and significance tests.

mod significance;

pub use significance::{binomial_test, bootstrap_diff_test, JudgmentCounts};

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::StopList;
use crate::{Error, Result};

/// Distinct n-grams pooled over all responses: `(types, types / tokens)`.
pub fn distinct_n<S: AsRef<str>>(responses: &[Vec<S>], n: usize) -> Result<(usize, f64)> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be >= 1".into()));
    }
    let mut types: HashSet<Vec<&str>> = HashSet::new();
    let mut tokens = 0usize;
    for r in responses {
        for w in r.windows(n) {
            types.insert(w.iter().map(AsRef::as_ref).collect());
            tokens += 1;
        }
    }
    if tokens == 0 {
        return Err(Error::Empty("n-grams"));
    }
    Ok((types.len(), types.len() as f64 / tokens as f64))
}

/// Corpus BLEU-1 on a 0-100 scale: clipped unigram precision times the
/// brevity penalty `exp(1 - r/c)` when the output is shorter (`c < r`).
pub fn bleu1<S: AsRef<str>, T: AsRef<str>>(responses: &[Vec<S>], references: &[Vec<T>]) -> Result<f64> {
    if responses.len() != references.len() {
        return Err(Error::DimensionMismatch { expected: references.len(), got: responses.len() });
    }
    if responses.is_empty() {
        return Err(Error::Empty("BLEU corpus"));
    }
    let (mut matched, mut c, mut r) = (0usize, 0usize, 0usize);
    for (hyp, refr) in responses.iter().zip(references) {
        let mut avail: HashMap<&str, usize> = HashMap::new();
        for w in refr {
            *avail.entry(w.as_ref()).or_default() += 1;
        }
        for w in hyp {
            if let Some(k) = avail.get_mut(w.as_ref()).filter(|k| **k > 0) {
                *k -= 1;
                matched += 1;
            }
        }
        c += hyp.len();
        r += refr.len();
    }
    if c == 0 || matched == 0 {
        return Ok(0.0);
    }
    let bp = if c >= r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    Ok(100.0 * bp * matched as f64 / c as f64)
}

/// Percentage of tokens on the stop list, pooled.
pub fn stopword_pct<S: AsRef<str>>(responses: &[Vec<S>], stop: &StopList) -> Result<f64> {
    if stop.is_empty() {
        return Err(Error::Empty("stop list"));
    }
    let mut total = 0usize;
    let mut hits = 0usize;
    for w in responses.iter().flatten() {
        total += 1;
        hits += usize::from(stop.contains(w.as_ref()));
    }
    if total == 0 {
        return Err(Error::Empty("response tokens"));
    }
    Ok(100.0 * hits as f64 / total as f64)
}

pub fn avg_len<S>(responses: &[Vec<S>]) -> Result<f64> {
    if responses.is_empty() {
        return Err(Error::Empty("responses"));
    }
    Ok(responses.iter().map(Vec::len).sum::<usize>() as f64 / responses.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub distinct1: (usize, f64),
    pub distinct2: (usize, f64),
    /// Absent without references.
    pub bleu1: Option<f64>,
    pub avg_len: f64,
    pub stopword_pct: f64,
}

impl MetricsReport {
    pub fn compute<S: AsRef<str>, T: AsRef<str>>(
        responses: &[Vec<S>],
        references: Option<&[Vec<T>]>,
        stop: &StopList,
    ) -> Result<Self> {
        Ok(Self {
            distinct1: distinct_n(responses, 1)?,
            distinct2: distinct_n(responses, 2)?,
            bleu1: references.map(|r| bleu1(responses, r)).transpose()?,
            avg_len: avg_len(responses)?,
            stopword_pct: stopword_pct(responses, stop)?,
        })
    }
}

/// Aligned plain-text table, one row per named report.
pub fn report_table(rows: &[(String, MetricsReport)]) -> String {
    let head = ["system", "distinct-1", "distinct-2", "BLEU-1", "avg-len", "stop-word%"];
    let cells: Vec<[String; 6]> = rows
        .iter()
        .map(|(name, m)| {
            [
                name.clone(),
                format!("{}/{:.3}", m.distinct1.0, m.distinct1.1),
                format!("{}/{:.3}", m.distinct2.0, m.distinct2.1),
                m.bleu1.map_or("-".into(), |b| format!("{b:.2}")),
                format!("{:.2}", m.avg_len),
                format!("{:.2}", m.stopword_pct),
            ]
        })
        .collect();
    let mut width = head.map(str::len);
    for row in &cells {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let mut line = |row: &[&str]| {
        let padded: Vec<String> = row
            .iter()
            .zip(width)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(&head);
    for row in &cells {
        line(&row.iter().map(String::as_str).collect::<Vec<_>>());
    }
    out
}
