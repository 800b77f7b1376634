use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use super::{ln_all, ConditionalLm};
use crate::corpus::{Vocabulary, BOS, EOS};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
struct Context {
    total: u64,
    /// Sorted by word id.
    followers: Vec<(usize, u64)>,
}

/// Interpolated absolute-discounting backoff n-gram over responses.
///
/// The unigram level is the maximum-likelihood estimate over tokens and
/// EOS. At order `k`, a seen history `h` gives
/// `P(w|h) = max(c(h,w) - D, 0) / c(h) + D·N1+(h·) / c(h) · P(w|h')`;
/// unseen histories defer to `P(w|h')`.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    order: usize,
    discount: f64,
    num_outputs: usize,
    unigram_counts: Vec<u64>,
    unigram: Vec<f64>,
    /// `contexts[k - 2]` holds histories of length `k - 1`.
    contexts: Vec<HashMap<Vec<usize>, Context>>,
}

/// Counts every sentence of `corpus` padded with `order - 1` BOS tokens
/// and terminated by EOS.
pub fn train_ngram(corpus: &[Vec<usize>], order: usize, discount: f64, num_outputs: usize) -> Result<NGramModel> {
    if order < 1 {
        return Err(Error::InvalidConfig("n-gram order must be >= 1".into()));
    }
    if !(discount > 0.0 && discount < 1.0) {
        return Err(Error::InvalidConfig("discount must lie in (0, 1)".into()));
    }
    if corpus.is_empty() {
        return Err(Error::Empty("n-gram training corpus"));
    }
    let mut unigram_counts = vec![0u64; num_outputs];
    let mut raw: Vec<HashMap<Vec<usize>, BTreeMap<usize, u64>>> = vec![HashMap::new(); order - 1];
    for sentence in corpus {
        let mut padded = vec![BOS; order - 1];
        padded.extend_from_slice(sentence);
        padded.push(EOS);
        for i in (order - 1)..padded.len() {
            let w = padded[i];
            if w >= num_outputs {
                return Err(Error::OutOfRange { what: "word id", value: w });
            }
            unigram_counts[w] += 1;
            for k in 2..=order {
                let hist = padded[i + 1 - k..i].to_vec();
                *raw[k - 2].entry(hist).or_default().entry(w).or_default() += 1;
            }
        }
    }
    Ok(NGramModel::from_counts(order, discount, unigram_counts, raw))
}

impl NGramModel {
    fn from_counts(
        order: usize,
        discount: f64,
        unigram_counts: Vec<u64>,
        raw: Vec<HashMap<Vec<usize>, BTreeMap<usize, u64>>>,
    ) -> Self {
        let total: u64 = unigram_counts.iter().sum();
        let unigram = unigram_counts.iter().map(|&c| c as f64 / total as f64).collect();
        let contexts = raw
            .into_iter()
            .map(|level| {
                level
                    .into_iter()
                    .map(|(h, f)| {
                        let followers: Vec<(usize, u64)> = f.into_iter().collect();
                        let total = followers.iter().map(|x| x.1).sum();
                        (h, Context { total, followers })
                    })
                    .collect()
            })
            .collect();
        Self {
            order,
            discount,
            num_outputs: unigram_counts.len(),
            unigram_counts,
            unigram,
            contexts,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    /// Next-token probabilities after `prefix` (no BOS; it is implied).
    pub fn distribution(&self, prefix: &[usize]) -> Vec<f64> {
        let mut p = self.unigram.clone();
        if self.order == 1 {
            return p;
        }
        let pad = (self.order - 1).saturating_sub(prefix.len());
        let mut history = vec![BOS; pad];
        history.extend_from_slice(&prefix[prefix.len().saturating_sub(self.order - 1)..]);
        for k in 2..=self.order {
            let h = &history[history.len() - (k - 1)..];
            if let Some(ctx) = self.contexts[k - 2].get(h) {
                let total = ctx.total as f64;
                let backoff = self.discount * ctx.followers.len() as f64 / total;
                p.iter_mut().for_each(|x| *x *= backoff);
                for &(w, c) in &ctx.followers {
                    p[w] += (c as f64 - self.discount) / total;
                }
            }
        }
        p
    }

    /// `NGRAM v1` text: header, then per order a `\k-grams <count>` section
    /// of `history<TAB>word<TAB>count` lines (history omitted at order 1),
    /// tokens spelled through `vocab`.
    pub fn to_text(&self, vocab: &Vocabulary) -> String {
        let mut out = format!(
            "NGRAM v1\norder {}\ndiscount {}\noutputs {}\n",
            self.order, self.discount, self.num_outputs
        );
        let nz: Vec<(usize, u64)> = self
            .unigram_counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(w, &c)| (w, c))
            .collect();
        let _ = writeln!(out, "\\1-grams {}", nz.len());
        for (w, c) in nz {
            let _ = writeln!(out, "{}\t{}", vocab.token(w), c);
        }
        for (i, level) in self.contexts.iter().enumerate() {
            let mut hists: Vec<(&Vec<usize>, &Context)> = level.iter().collect();
            hists.sort_by(|a, b| a.0.cmp(b.0));
            let n: usize = hists.iter().map(|(_, c)| c.followers.len()).sum();
            let _ = writeln!(out, "\\{}-grams {}", i + 2, n);
            for (h, ctx) in hists {
                let hist = h.iter().map(|&t| vocab.token(t)).collect::<Vec<_>>().join(" ");
                for &(w, c) in &ctx.followers {
                    let _ = writeln!(out, "{hist}\t{}\t{c}", vocab.token(w));
                }
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str, vocab: &Vocabulary) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        if lines.next().map(|x| x.1) != Some("NGRAM v1") {
            return Err(Error::parse(1, "expected `NGRAM v1`"));
        }
        let mut header = |key: &str| -> Result<String> {
            let (ln, line) = lines.next().ok_or_else(|| Error::parse(0, "truncated header"))?;
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(str::to_owned)
                .ok_or_else(|| Error::parse(ln, format!("expected `{key} <value>`")))
        };
        let order: usize = header("order")?.parse().map_err(|_| Error::parse(2, "bad order"))?;
        let discount: f64 = header("discount")?.parse().map_err(|_| Error::parse(3, "bad discount"))?;
        let outputs: usize = header("outputs")?.parse().map_err(|_| Error::parse(4, "bad outputs"))?;
        if order < 1 || outputs != vocab.len() {
            return Err(Error::parse(2, "order must be >= 1 and outputs must match the vocabulary"));
        }
        let mut unigram_counts = vec![0u64; outputs];
        let mut raw: Vec<HashMap<Vec<usize>, BTreeMap<usize, u64>>> = vec![HashMap::new(); order - 1];
        let mut level = 0;
        let lookup = |tok: &str, ln: usize| {
            vocab
                .get(tok)
                .ok_or_else(|| Error::parse(ln, format!("token {tok:?} not in vocabulary")))
        };
        for (ln, line) in lines {
            if line == "end" {
                break;
            }
            if let Some(rest) = line.strip_prefix('\\') {
                level = rest
                    .split_once("-grams")
                    .and_then(|(k, _)| k.parse::<usize>().ok())
                    .filter(|&k| (1..=order).contains(&k))
                    .ok_or_else(|| Error::parse(ln, "bad section header"))?;
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let count = fields
                .last()
                .and_then(|c| c.parse::<u64>().ok())
                .ok_or_else(|| Error::parse(ln, "bad count"))?;
            match (level, fields.as_slice()) {
                (1, [w, _]) => unigram_counts[lookup(w, ln)?] = count,
                (k, [h, w, _]) if k >= 2 => {
                    let hist = h
                        .split(' ')
                        .map(|t| lookup(t, ln))
                        .collect::<Result<Vec<_>>>()?;
                    if hist.len() != k - 1 {
                        return Err(Error::parse(ln, "history length does not match order"));
                    }
                    raw[k - 2].entry(hist).or_default().insert(lookup(w, ln)?, count);
                }
                _ => return Err(Error::parse(ln, "malformed n-gram line")),
            }
        }
        if unigram_counts.iter().all(|&c| c == 0) {
            return Err(Error::Empty("unigram counts"));
        }
        Ok(Self::from_counts(order, discount, unigram_counts, raw))
    }
}

impl ConditionalLm for NGramModel {
    fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    /// The n-gram ignores the source.
    fn next_logprobs(&self, _source: &[usize], prefix: &[usize]) -> Vec<f64> {
        ln_all(self.distribution(prefix))
    }
}
