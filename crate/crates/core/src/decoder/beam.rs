use std::cmp::Ordering;
use std::iter::once;

use super::{DecoderConfig, SourceContext};
use crate::corpus::{BOS, EOS, NULL, UNK};
use crate::langmodel::ConditionalLm;
use crate::topic_syntax::MIN_CONTENT_MASS;
use crate::{Error, Result};

/// Running sums behind a hypothesis score; everything is recoverable from
/// the tokens and their step log-probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Running {
    /// `Σ log P(w_i | w_<i, X)`, EOS included once finished.
    pub loglik: f64,
    /// Accumulated topic-word bonus.
    pub bias: f64,
    /// `Σ topic_contrib(w)`.
    pub topic_num: f64,
    /// `Σ P(C=0|w)`.
    pub topic_z: f64,
    /// `Σ emb_contrib(w)`.
    pub emb_sum: f64,
    pub n_inv: usize,
    /// Generated words, EOS excluded.
    pub len: usize,
}

impl Running {
    pub fn push(self, word: usize, logprob: f64, ctx: &SourceContext) -> Self {
        let c = ctx.contrib(word);
        Self {
            loglik: self.loglik + logprob,
            bias: self.bias + ctx.bias_for(word),
            topic_num: self.topic_num + c.topic,
            topic_z: self.topic_z + c.content,
            emb_sum: self.emb_sum + c.semantic,
            n_inv: self.n_inv + usize::from(c.in_vocab),
            len: self.len + 1,
        }
    }

    pub fn finish(self, eos_logprob: f64) -> Self {
        Self { loglik: self.loglik + eos_logprob, ..self }
    }

    /// `T = topic_num / topic_z`, or 0 when the term does not apply.
    pub fn topic_score(&self, ctx: &SourceContext, cfg: &DecoderConfig) -> f64 {
        if ctx.topic_enabled() && self.len >= cfg.constraint_start_step && self.topic_z >= MIN_CONTENT_MASS {
            self.topic_num / self.topic_z
        } else {
            0.0
        }
    }

    /// `S = emb_sum / max(1, n_inv)`, or 0 before the start step.
    pub fn semantic_score(&self, cfg: &DecoderConfig) -> f64 {
        if self.len >= cfg.constraint_start_step {
            self.emb_sum / self.n_inv.max(1) as f64
        } else {
            0.0
        }
    }

    pub fn score(&self, ctx: &SourceContext, cfg: &DecoderConfig) -> f64 {
        self.loglik + self.bias + cfg.alpha * self.topic_score(ctx, cfg) + cfg.beta * self.semantic_score(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Hypothesis {
    pub tokens: Vec<usize>,
    pub run: Running,
    pub finished: bool,
}

impl Hypothesis {
    pub fn score(&self, ctx: &SourceContext, cfg: &DecoderConfig) -> f64 {
        self.run.score(ctx, cfg)
    }
}

/// A decoded response with its score decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub tokens: Vec<usize>,
    pub loglik: f64,
    pub bias: f64,
    pub topic_score: f64,
    pub semantic_score: f64,
    /// `loglik + bias + α·T + β·S` under the weights last applied.
    pub forward: f64,
    pub reverse_score: Option<f64>,
    /// Ranking key: `forward` until reranked.
    pub total: f64,
    pub finished: bool,
}

impl Candidate {
    fn new(h: &Hypothesis, ctx: &SourceContext, cfg: &DecoderConfig) -> Self {
        let total = h.score(ctx, cfg);
        Self {
            tokens: h.tokens.clone(),
            loglik: h.run.loglik,
            bias: h.run.bias,
            topic_score: h.run.topic_score(ctx, cfg),
            semantic_score: h.run.semantic_score(cfg),
            forward: total,
            reverse_score: None,
            total,
            finished: h.finished,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamOutput {
    /// Finished candidates by descending score, or the single best
    /// unfinished hypothesis when nothing could finish.
    pub candidates: Vec<Candidate>,
    pub complete: bool,
}

struct Expansion {
    parent: usize,
    word: usize,
    run: Running,
    score: f64,
}

/// Left-to-right beam search.
///
/// Every live hypothesis is extended by every admissible word (and by EOS
/// once it has `min_len` words); the `beam_size` best expansions survive.
/// Those ending in EOS are set aside, the rest stay live. Search stops once
/// `beam_size` responses have finished or nothing is live. Equal scores are
/// ordered by token ids, EOS included, so the result is deterministic.
pub fn beam_search<L: ConditionalLm + ?Sized>(
    lm: &L,
    ctx: &SourceContext,
    cfg: &DecoderConfig,
) -> Result<BeamOutput> {
    cfg.validate()?;
    let scorer = lm.scorer(ctx.source());
    let mut live = vec![Hypothesis::default()];
    let mut finished: Vec<Hypothesis> = Vec::new();
    let mut fallback: Option<Hypothesis> = None;
    let mut pool: Vec<Expansion> = Vec::new();
    let admissible = |w: usize| !(w == EOS || w == BOS || w == NULL || (w == UNK && !cfg.allow_unk));

    while !live.is_empty() && finished.len() < cfg.beam_size {
        pool.clear();
        for (parent, h) in live.iter().enumerate() {
            let lps = scorer.next_logprobs(&h.tokens);
            if h.run.len >= cfg.min_len && lps[EOS].is_finite() {
                let run = h.run.finish(lps[EOS]);
                pool.push(Expansion { parent, word: EOS, run, score: run.score(ctx, cfg) });
            }
            if h.run.len < cfg.max_len {
                for (word, &lp) in lps.iter().enumerate() {
                    if admissible(word) && lp.is_finite() {
                        let run = h.run.push(word, lp, ctx);
                        pool.push(Expansion { parent, word, run, score: run.score(ctx, cfg) });
                    }
                }
            }
        }
        if pool.is_empty() {
            break;
        }
        let order = |a: &Expansion, b: &Expansion| -> Ordering {
            b.score.total_cmp(&a.score).then_with(|| {
                let sa = live[a.parent].tokens.iter().chain(once(&a.word));
                sa.cmp(live[b.parent].tokens.iter().chain(once(&b.word)))
            })
        };
        if pool.len() > cfg.beam_size {
            pool.select_nth_unstable_by(cfg.beam_size - 1, order);
            pool.truncate(cfg.beam_size);
        }
        pool.sort_by(order);
        let mut next = Vec::with_capacity(pool.len());
        for e in &pool {
            let mut tokens = live[e.parent].tokens.clone();
            if e.word == EOS {
                finished.push(Hypothesis { tokens, run: e.run, finished: true });
            } else {
                tokens.push(e.word);
                next.push(Hypothesis { tokens, run: e.run, finished: false });
            }
        }
        if let Some(h) = next.first() {
            fallback = Some(h.clone());
        }
        live = next;
    }

    if finished.is_empty() {
        let h = fallback.ok_or_else(|| Error::Degenerate("no admissible token at the first step".into()))?;
        log::warn!("no hypothesis finished within {} tokens", cfg.max_len);
        return Ok(BeamOutput { candidates: vec![Candidate::new(&h, ctx, cfg)], complete: false });
    }
    let mut candidates: Vec<Candidate> = finished.iter().map(|h| Candidate::new(h, ctx, cfg)).collect();
    candidates.sort_by(|a, b| {
        b.total.total_cmp(&a.total).then_with(|| {
            a.tokens.iter().chain(once(&EOS)).cmp(b.tokens.iter().chain(once(&EOS)))
        })
    });
    Ok(BeamOutput { candidates, complete: true })
}
