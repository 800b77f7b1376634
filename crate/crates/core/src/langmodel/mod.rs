//! Conditional language models `P(Y|X)` scored left to right.
//!
//! [`ConditionalLm`] is the seam the decoder talks to. The bundled
//! [`MixtureLm`] interpolates a backoff n-gram over responses with an IBM
//! Model 1 lexical channel from the source; [`GridLm`] replays externally
//! computed per-step log-probabilities.

mod grid;
mod ibm1;
mod mixture;
mod ngram;

pub use grid::GridLm;
pub use ibm1::{train_ibm1, LexicalTable};
pub use mixture::MixtureLm;
pub use ngram::{train_ngram, NGramModel};

use crate::corpus::EOS;

/// Left-to-right conditional model over vocabulary ids.
///
/// For any source and prefix, `next_logprobs` returns one natural-log
/// probability per output id (EOS included) and the exponentials sum to 1.
pub trait ConditionalLm: Send + Sync {
    fn num_outputs(&self) -> usize;

    fn next_logprobs(&self, source: &[usize], prefix: &[usize]) -> Vec<f64>;

    /// Scorer bound to one source. Implementations may precompute
    /// source-dependent state here.
    fn scorer<'a>(&'a self, source: &'a [usize]) -> Box<dyn PrefixScorer + 'a> {
        Box::new(Bound { lm: self, source })
    }

    /// `Σ_i log P(y_i | y_<i, X) + log P(EOS | Y, X)`.
    fn sequence_logprob(&self, source: &[usize], target: &[usize]) -> f64 {
        let scorer = self.scorer(source);
        let mut total = 0.0;
        for i in 0..=target.len() {
            let next = target.get(i).copied().unwrap_or(EOS);
            total += scorer.next_logprobs(&target[..i])[next];
        }
        total
    }
}

/// Next-token scoring for a fixed source.
pub trait PrefixScorer {
    fn next_logprobs(&self, prefix: &[usize]) -> Vec<f64>;
}

struct Bound<'a, L: ?Sized> {
    lm: &'a L,
    source: &'a [usize],
}

impl<L: ConditionalLm + ?Sized> PrefixScorer for Bound<'_, L> {
    fn next_logprobs(&self, prefix: &[usize]) -> Vec<f64> {
        self.lm.next_logprobs(self.source, prefix)
    }
}

pub(crate) fn ln_all(p: Vec<f64>) -> Vec<f64> {
    p.into_iter().map(f64::ln).collect()
}
