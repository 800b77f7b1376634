use std::fmt::Write as _;

use super::ConditionalLm;
use crate::corpus::EOS;
use crate::{Error, Result};

/// Replays a fixed table of per-step log-probabilities, ignoring both the
/// source and the prefix contents. Row `i` scores the token at position
/// `i`; past the last row only EOS is possible.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLm {
    num_outputs: usize,
    rows: Vec<Vec<f64>>,
}

impl GridLm {
    pub fn new(num_outputs: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if num_outputs <= EOS {
            return Err(Error::InvalidConfig("grid must cover EOS".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != num_outputs {
                return Err(Error::DimensionMismatch { expected: num_outputs, got: row.len() });
            }
            let mass: f64 = row.iter().map(|x| x.exp()).sum();
            if row.iter().any(|x| x.is_nan() || *x == f64::INFINITY) || (mass - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidConfig(format!("grid row {i} is not a distribution")));
            }
        }
        Ok(Self { num_outputs, rows })
    }

    /// `LOGPROB-GRID v1 <outputs>` followed by one whitespace-separated row
    /// per step; `-inf` is accepted.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or(Error::Empty("grid file"))?;
        let n = header
            .strip_prefix("LOGPROB-GRID v1 ")
            .and_then(|x| x.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::parse(1, "expected `LOGPROB-GRID v1 <outputs>`"))?;
        let rows = lines
            .enumerate()
            .map(|(i, l)| {
                l.split_whitespace()
                    .map(|x| x.parse::<f64>().map_err(|_| Error::parse(i + 2, format!("bad value {x:?}"))))
                    .collect()
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Self::new(n, rows)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("LOGPROB-GRID v1 {}\n", self.num_outputs);
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
        out
    }
}

impl ConditionalLm for GridLm {
    fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    fn next_logprobs(&self, _source: &[usize], prefix: &[usize]) -> Vec<f64> {
        self.rows.get(prefix.len()).cloned().unwrap_or_else(|| {
            let mut row = vec![f64::NEG_INFINITY; self.num_outputs];
            row[EOS] = 0.0;
            row
        })
    }
}
