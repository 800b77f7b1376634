//! Beam search over a [`ConditionalLm`](crate::langmodel::ConditionalLm)
//! with additive topic and semantic constraints, MMI reranking, the
//! topic-word bias mode and the stop/topic log-probability diagnostic.
//!
//! A hypothesis `Y` for source `X` is ranked by
//! `log P(Y|X) + bias + α·T(Y) + β·S(Y)` where `T = P(T|X)·P(T|Y)` and
//! `S = Emb(X)·Emb(Y)`. Both terms factor over words, so each word's
//! contribution is computed once per source and summed incrementally.

mod beam;
mod context;
mod diagnose;
mod record;
mod rerank;

pub use beam::{beam_search, BeamOutput, Candidate, Hypothesis, Running};
pub use context::{ta_bias_words, SourceContext, WordContrib};
pub use diagnose::{diagnose_split, topic_word_list, DiagnosticTables};
pub use record::{CandidateRecord, DecodeRecord};
pub use rerank::{mmi_rerank, rank_by_weights};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Additive log-probability bonus for the source's dominant-topic words.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaBias {
    pub bias: f64,
    /// Size of the topic-word set.
    pub n_words: usize,
}

impl Default for TaBias {
    fn default() -> Self {
        Self { bias: 1.0, n_words: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecoderConfig {
    pub beam_size: usize,
    /// Topic-constraint weight.
    pub alpha: f64,
    /// Semantic-constraint weight.
    pub beta: f64,
    pub max_len: usize,
    pub min_len: usize,
    /// Hypothesis length from which the constraint terms count.
    pub constraint_start_step: usize,
    pub ta_bias: Option<TaBias>,
    /// Weight of the reverse-model score when reranking.
    pub mmi_lambda: f64,
    /// Keep the forward constrained score in the rerank key.
    pub keep_forward_in_mmi: bool,
    /// Let the decoder emit the unknown-word token.
    pub allow_unk: bool,
    /// Candidates are totally ordered by score then token ids, so the seed
    /// never changes results; it is carried for run records.
    pub seed: u64,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            beam_size: 10,
            alpha: 5.0,
            beta: 2.0,
            max_len: 20,
            min_len: 3,
            constraint_start_step: 2,
            ta_bias: None,
            mmi_lambda: 0.5,
            keep_forward_in_mmi: true,
            allow_unk: false,
            seed: 0,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.beam_size == 0 {
            return bad("beam_size must be >= 1");
        }
        if self.min_len == 0 || self.max_len < self.min_len {
            return bad("need max_len >= min_len >= 1");
        }
        if !(self.alpha >= 0.0 && self.beta >= 0.0 && self.alpha.is_finite() && self.beta.is_finite()) {
            return bad("alpha and beta must be finite and >= 0");
        }
        if self.constraint_start_step == 0 {
            return bad("constraint_start_step must be >= 1");
        }
        if !self.mmi_lambda.is_finite() || self.mmi_lambda < 0.0 {
            return bad("mmi_lambda must be finite and >= 0");
        }
        if let Some(ta) = &self.ta_bias {
            if !ta.bias.is_finite() {
                return bad("ta bias must be finite");
            }
        }
        Ok(())
    }
}
