//! Response generation by beam search under distributional constraints.
//!
//! A conditional language model supplies `log P(Y|X)`; two additive
//! constraint terms reward hypotheses whose topic mixture (estimated from an
//! HMM-LDA syntax/topic model) and whose SIF sentence embedding resemble the
//! source's. Both terms factorize over words, so the beam keeps running sums
//! and rescoring an expansion costs O(1).
//!
//! Modules:
//!
//! * [`corpus`]: tokenization, vocabulary, length buckets, stop-words.
//! * [`topic_syntax`]: HMM-LDA collapsed Gibbs training and per-word topic statistics.
//! * [`sif`]: SIF sentence embeddings and dot-product similarity.
//! * [`langmodel`]: the [`langmodel::ConditionalLm`] contract and a backoff n-gram / IBM-1 mixture.
//! * [`decoder`]: constrained beam search, MMI reranking, topic-word bias, diagnostics.
//! * [`metrics`]: distinct-n, BLEU-1, stop-word %, significance tests.

pub mod corpus;
pub mod decoder;
mod error;
pub mod langmodel;
pub mod metrics;
pub mod sif;
pub mod topic_syntax;
mod util;

pub use error::{Error, Result};
