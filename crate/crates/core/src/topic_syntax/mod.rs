//! HMM-LDA syntax/topic model.
//!
//! Every token carries a topic `z`, drawn from its conversation's topic
//! mixture, and a syntax class `c`, drawn from a Markov chain over classes
//! that runs along each utterance between two boundary states. Class 0
//! emits from the topic's word distribution; every other class emits from
//! its own. Training is collapsed Gibbs sampling; decoding only needs the
//! per-word summaries in [`WordTopicStats`].

mod model;
mod sampler;
mod stats;

pub use model::HmmLdaModel;
pub use sampler::HmmLdaState;
pub use stats::{sentence_topic_dist, top_topic_words, word_stats, SentenceTopics, WordTopicStats};

use serde::{Deserialize, Serialize};

use crate::corpus::{DialoguePair, Vocabulary};
use crate::{Error, Result};

/// One conversation: utterances of word ids.
pub type Document = Vec<Vec<usize>>;

/// Groups dialogue pairs into conversation documents. Consecutive pairs
/// whose source repeats the previous target continue one conversation;
/// every utterance appears once.
pub fn conversation_documents(pairs: &[DialoguePair], vocab: &Vocabulary) -> Vec<Document> {
    let mut docs: Vec<Document> = Vec::new();
    let mut prev: Option<&DialoguePair> = None;
    for p in pairs {
        let continues = prev.is_some_and(|q| q.target == p.source);
        if !continues {
            docs.push(vec![vocab.encode(&p.source)]);
        }
        if let Some(d) = docs.last_mut() {
            d.push(vocab.encode(&p.target));
        }
        prev = Some(p);
    }
    docs
}

/// Content words whose total `P(C=0|w)` falls below this make a sentence degenerate.
pub const MIN_CONTENT_MASS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HmmLdaConfig {
    pub num_topics: usize,
    /// Syntax classes including the topic class 0.
    pub num_classes: usize,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub gamma: f64,
    pub burn_in: usize,
    pub seed: u64,
    /// Number of final samples whose counts are pooled into the word
    /// statistics; 1 uses the single final sample.
    pub average_last: usize,
    /// Independent chains, seeded `seed, seed + 1, ...`; the one whose final
    /// state has the highest collapsed log joint is kept.
    pub chains: usize,
}

impl Default for HmmLdaConfig {
    fn default() -> Self {
        Self::with_topics(50)
    }
}

impl HmmLdaConfig {
    /// Defaults with `alpha = 50 / num_topics`.
    pub fn with_topics(num_topics: usize) -> Self {
        Self {
            num_topics,
            num_classes: 20,
            alpha: 50.0 / num_topics.max(1) as f64,
            beta: 0.01,
            delta: 0.01,
            gamma: 0.1,
            burn_in: 2500,
            seed: 0,
            average_last: 1,
            chains: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_topics < 2 {
            return Err(Error::InvalidConfig("num_topics must be >= 2".into()));
        }
        if self.burn_in < 1 {
            return Err(Error::InvalidConfig("burn_in must be >= 1".into()));
        }
        if self.chains < 1 {
            return Err(Error::InvalidConfig("chains must be >= 1".into()));
        }
        if self.average_last < 1 {
            return Err(Error::InvalidConfig("average_last must be >= 1".into()));
        }
        self.validate_sampler()
    }

    /// Checks needed to run sweeps at all; a single topic is allowed here.
    pub(crate) fn validate_sampler(&self) -> Result<()> {
        if self.num_topics < 1 {
            return Err(Error::InvalidConfig("num_topics must be >= 1".into()));
        }
        if self.num_classes < 2 {
            return Err(Error::InvalidConfig("num_classes must be >= 2".into()));
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("delta", self.delta),
            ("gamma", self.gamma),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Runs `burn_in` sweeps from a sequential start and summarizes the result.
///
/// With `average_last = S > 1`, `S - 1` further sweeps follow and the word
/// statistics pool the counts of the last `S` states. Chains run on
/// separate threads; the result does not depend on scheduling.
pub fn train(
    config: &HmmLdaConfig,
    documents: &[Document],
    vocab_size: usize,
) -> Result<(HmmLdaState, WordTopicStats)> {
    config.validate()?;
    let runs: Vec<Result<(HmmLdaState, WordTopicStats)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..config.chains as u64)
            .map(|i| {
                let cfg = HmmLdaConfig { seed: config.seed.wrapping_add(i), ..config.clone() };
                scope.spawn(move || run_chain(&cfg, documents, vocab_size))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("chain thread panicked")).collect()
    });
    let mut best: Option<(f64, HmmLdaState, WordTopicStats)> = None;
    for (i, run) in runs.into_iter().enumerate() {
        let (state, stats) = run?;
        let lj = state.model().log_joint();
        log::debug!("hmm-lda chain {i}: log joint {lj:.1}");
        if best.as_ref().is_none_or(|b| lj > b.0) {
            best = Some((lj, state, stats));
        }
    }
    let (_, state, stats) = best.expect("at least one chain");
    Ok((state, stats))
}

fn run_chain(config: &HmmLdaConfig, documents: &[Document], vocab_size: usize) -> Result<(HmmLdaState, WordTopicStats)> {
    let mut state = HmmLdaState::initialize(config, documents, vocab_size)?;
    for sweep in 0..config.burn_in {
        state.gibbs_sweep();
        if (sweep + 1) % 100 == 0 {
            log::debug!("hmm-lda seed {} sweep {}/{}", config.seed, sweep + 1, config.burn_in);
        }
    }
    let stats = if config.average_last == 1 {
        word_stats(state.model(), config.beta)
    } else {
        let mut pooled = stats::PooledCounts::new(state.model());
        for _ in 1..config.average_last {
            state.gibbs_sweep();
            pooled.add(state.model());
        }
        pooled.finish(config.beta)
    };
    Ok((state, stats))
}
