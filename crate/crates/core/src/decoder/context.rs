use std::collections::HashSet;
use std::sync::OnceLock;

use crate::sif::SifModel;
use crate::topic_syntax::{sentence_topic_dist, top_topic_words, HmmLdaModel, SentenceTopics, WordTopicStats};
use crate::util::dot;
use crate::Result;

/// Per-word additive pieces of the two constraint terms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WordContrib {
    /// `P(C=0|w) · (tX · P(T|w))`, zero when the topic term is off.
    pub topic: f64,
    /// `P(C=0|w)`.
    pub content: f64,
    /// `q · (a/(a+P(w))) vec(w)`, zero without a vector.
    pub semantic: f64,
    pub in_vocab: bool,
}

/// Source-side state shared by every hypothesis for one input.
pub struct SourceContext<'a> {
    source: Vec<usize>,
    stats: Option<&'a WordTopicStats>,
    sif: Option<&'a SifModel>,
    topics: Option<SentenceTopics>,
    q: Vec<f64>,
    cache: Vec<OnceLock<WordContrib>>,
    bias_words: HashSet<usize>,
    bias: f64,
}

impl<'a> SourceContext<'a> {
    /// `vocab_size` bounds the contribution cache; larger ids are computed
    /// on demand.
    pub fn new(source: &[usize], stats: &'a WordTopicStats, sif: &'a SifModel, vocab_size: usize) -> Self {
        let topics = sentence_topic_dist(stats, source);
        let q = sif.embed(source);
        Self {
            source: source.to_vec(),
            stats: Some(stats),
            sif: Some(sif),
            topics: Some(topics),
            q,
            cache: (0..vocab_size).map(|_| OnceLock::new()).collect(),
            bias_words: HashSet::new(),
            bias: 0.0,
        }
    }

    /// Context with no constraint models: every contribution is zero.
    pub fn unconstrained(source: &[usize]) -> Self {
        Self {
            source: source.to_vec(),
            stats: None,
            sif: None,
            topics: None,
            q: Vec::new(),
            cache: Vec::new(),
            bias_words: HashSet::new(),
            bias: 0.0,
        }
    }

    /// Adds `bias` to the log-probability of every word in `words`.
    pub fn with_bias(mut self, words: impl IntoIterator<Item = usize>, bias: f64) -> Self {
        self.bias_words = words.into_iter().collect();
        self.bias = bias;
        self
    }

    pub fn source(&self) -> &[usize] {
        &self.source
    }

    /// `P(T|X)`, or `None` without a topic model.
    pub fn source_topics(&self) -> Option<&SentenceTopics> {
        self.topics.as_ref()
    }

    /// Projected source embedding (empty without a SIF model).
    pub fn source_embedding(&self) -> &[f64] {
        &self.q
    }

    /// False for a source with no content mass or without a topic model.
    pub fn topic_enabled(&self) -> bool {
        self.topics.as_ref().is_some_and(|t| !t.degenerate)
    }

    pub fn bias_words(&self) -> &HashSet<usize> {
        &self.bias_words
    }

    pub fn bias_for(&self, word: usize) -> f64 {
        if self.bias_words.contains(&word) {
            self.bias
        } else {
            0.0
        }
    }

    pub fn contrib(&self, word: usize) -> WordContrib {
        match self.cache.get(word) {
            Some(cell) => *cell.get_or_init(|| self.compute(word)),
            None => self.compute(word),
        }
    }

    fn compute(&self, word: usize) -> WordContrib {
        let mut c = WordContrib::default();
        if let (Some(stats), Some(topics)) = (self.stats, &self.topics) {
            c.content = stats.content_prob(word);
            if !topics.degenerate && c.content > 0.0 {
                c.topic = c.content * dot(&topics.dist, stats.topic_given_word(word));
            }
        }
        if let Some(v) = self.sif.and_then(|s| s.vector(word).map(|v| (s.weight(word), v))) {
            c.in_vocab = true;
            c.semantic = v.0 * dot(&self.q, v.1);
        }
        c
    }
}

/// Top `n` words of the most probable source topic (lowest index on ties);
/// empty for a degenerate source.
pub fn ta_bias_words(model: &HmmLdaModel, topics: &SentenceTopics, n: usize) -> Result<Vec<usize>> {
    if topics.degenerate {
        return Ok(Vec::new());
    }
    let mut best = 0;
    for (k, p) in topics.dist.iter().enumerate() {
        if *p > topics.dist[best] {
            best = k;
        }
    }
    top_topic_words(model, best, n, &HashSet::new())
}
