use super::{ln_all, ConditionalLm, LexicalTable, NGramModel, PrefixScorer};
use crate::corpus::{EOS, NULL};

/// Response n-gram interpolated with a lexical channel from the source.
///
/// `P(EOS | Y, X) = P_ng(EOS | Y)`; for any other `w`,
/// `P(w | Y, X) = λ·P_ng(w | Y) + (1-λ)·(1 - P_ng(EOS | Y))·P_ch(w | X)`
/// with `P_ch(w | X) = 1/(|X|+1) · Σ_{x ∈ X ∪ {NULL}} t(w | x)`.
/// The channel never predicts EOS, so its share is scaled by the
/// non-EOS mass to keep the result normalized.
#[derive(Debug, Clone)]
pub struct MixtureLm {
    pub ngram: NGramModel,
    pub channel: LexicalTable,
    pub lambda: f64,
}

impl MixtureLm {
    pub fn new(ngram: NGramModel, channel: LexicalTable, lambda: f64) -> crate::Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(crate::Error::InvalidConfig(format!("lambda {lambda} outside [0, 1]")));
        }
        Ok(Self { ngram, channel, lambda })
    }

    /// `P_ch(· | X)` as a dense vector.
    pub fn channel_dist(&self, source: &[usize]) -> Vec<f64> {
        let mut p = vec![0.0; self.ngram.num_outputs()];
        let share = 1.0 / (source.len() + 1) as f64;
        for &x in std::iter::once(&NULL).chain(source) {
            for &(w, t) in self.channel.row(x) {
                if w < p.len() && w != EOS {
                    p[w] += share * t;
                }
            }
        }
        p
    }

    fn mix(&self, channel: &[f64], prefix: &[usize]) -> Vec<f64> {
        let mut p = self.ngram.distribution(prefix);
        let eos = p[EOS];
        let rest = (1.0 - self.lambda) * (1.0 - eos);
        for (w, (x, c)) in p.iter_mut().zip(channel).enumerate() {
            if w != EOS {
                *x = self.lambda * *x + rest * c;
            }
        }
        p
    }
}

struct MixtureScorer<'a> {
    lm: &'a MixtureLm,
    channel: Vec<f64>,
}

impl PrefixScorer for MixtureScorer<'_> {
    fn next_logprobs(&self, prefix: &[usize]) -> Vec<f64> {
        ln_all(self.lm.mix(&self.channel, prefix))
    }
}

impl ConditionalLm for MixtureLm {
    fn num_outputs(&self) -> usize {
        self.ngram.num_outputs()
    }

    fn next_logprobs(&self, source: &[usize], prefix: &[usize]) -> Vec<f64> {
        ln_all(self.mix(&self.channel_dist(source), prefix))
    }

    fn scorer<'a>(&'a self, source: &'a [usize]) -> Box<dyn PrefixScorer + 'a> {
        Box::new(MixtureScorer { lm: self, channel: self.channel_dist(source) })
    }
}
