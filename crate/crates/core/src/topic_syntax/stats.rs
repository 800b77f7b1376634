use std::collections::HashSet;
use std::fmt::Write as _;

use super::{HmmLdaModel, MIN_CONTENT_MASS};
use crate::corpus::Vocabulary;
use crate::{Error, Result};

/// Per-word topic distribution `P(T|w)` and content probability `P(C=0|w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WordTopicStats {
    num_topics: usize,
    /// `V × K`.
    topic_given_word: Vec<f64>,
    content_prob: Vec<f64>,
    uniform: Vec<f64>,
}

/// Estimates [`WordTopicStats`] from a single sample's counts:
///
/// * `P(C=0|w) = n(w, c=0) / n(w)`
/// * `P(T=z|w) = (n(w, z, c=0) + smoothing) / (n(w, c=0) + K·smoothing)`
///
/// Words never seen get `P(C=0|w) = 0` and a uniform topic distribution.
pub fn word_stats(model: &HmmLdaModel, smoothing: f64) -> WordTopicStats {
    let mut pooled = PooledCounts::new(model);
    pooled.samples = 1;
    pooled.finish(smoothing)
}

/// Count sums over several samples of the same chain.
pub(crate) struct PooledCounts {
    k: usize,
    v: usize,
    /// `V × K` topic counts of class-0 tokens.
    topic_word: Vec<f64>,
    word_total: Vec<f64>,
    samples: usize,
}

impl PooledCounts {
    pub(crate) fn new(model: &HmmLdaModel) -> Self {
        let mut p = Self {
            k: model.num_topics(),
            v: model.vocab_size(),
            topic_word: vec![0.0; model.num_topics() * model.vocab_size()],
            word_total: vec![0.0; model.vocab_size()],
            samples: 0,
        };
        p.add(model);
        p
    }

    pub(crate) fn add(&mut self, m: &HmmLdaModel) {
        for w in 0..self.v {
            let mut total = 0.0;
            for z in 0..self.k {
                let n = m.topic_word_count(z, w) as f64;
                self.topic_word[w * self.k + z] += n;
                total += n;
            }
            for c in 1..m.num_classes() {
                total += m.class_word_count(c, w) as f64;
            }
            self.word_total[w] += total;
        }
        self.samples += 1;
    }

    pub(crate) fn finish(self, smoothing: f64) -> WordTopicStats {
        let k = self.k;
        let s = self.samples as f64;
        let mut topic_given_word = vec![0.0; self.v * k];
        let mut content_prob = vec![0.0; self.v];
        for w in 0..self.v {
            let row = &self.topic_word[w * k..(w + 1) * k];
            let content: f64 = row.iter().sum();
            if self.word_total[w] > 0.0 {
                content_prob[w] = content / self.word_total[w];
            }
            let denom = content / s + k as f64 * smoothing;
            for z in 0..k {
                topic_given_word[w * k + z] = (row[z] / s + smoothing) / denom;
            }
        }
        WordTopicStats {
            num_topics: k,
            topic_given_word,
            content_prob,
            uniform: vec![1.0 / k as f64; k],
        }
    }
}

impl WordTopicStats {
    /// Builds stats from explicit per-word rows; rows are validated.
    pub fn from_rows(num_topics: usize, rows: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        if num_topics == 0 {
            return Err(Error::InvalidConfig("num_topics must be >= 1".into()));
        }
        let mut topic_given_word = Vec::with_capacity(rows.len() * num_topics);
        let mut content_prob = Vec::with_capacity(rows.len());
        for (w, (c, dist)) in rows.into_iter().enumerate() {
            if dist.len() != num_topics {
                return Err(Error::DimensionMismatch { expected: num_topics, got: dist.len() });
            }
            let sum: f64 = dist.iter().sum();
            if !(0.0..=1.0).contains(&c) || (sum - 1.0).abs() > 1e-6 || dist.iter().any(|&p| p < 0.0) {
                return Err(Error::OutOfRange { what: "word topic row", value: w });
            }
            content_prob.push(c);
            topic_given_word.extend(dist);
        }
        Ok(Self {
            num_topics,
            topic_given_word,
            content_prob,
            uniform: vec![1.0 / num_topics as f64; num_topics],
        })
    }

    pub fn num_topics(&self) -> usize {
        self.num_topics
    }

    pub fn vocab_size(&self) -> usize {
        self.content_prob.len()
    }

    /// `P(T|w)`; uniform for ids outside the trained vocabulary.
    pub fn topic_given_word(&self, word: usize) -> &[f64] {
        if word < self.vocab_size() {
            &self.topic_given_word[word * self.num_topics..(word + 1) * self.num_topics]
        } else {
            &self.uniform
        }
    }

    /// `P(C=0|w)`; 0 outside the trained vocabulary.
    pub fn content_prob(&self, word: usize) -> f64 {
        self.content_prob.get(word).copied().unwrap_or(0.0)
    }

    /// `word<TAB>P(C=0|w)<TAB>p_1,...,p_K` per vocabulary entry.
    pub fn to_text(&self, vocab: &Vocabulary) -> String {
        let mut out = String::new();
        for w in 0..self.vocab_size().min(vocab.len()) {
            let _ = write!(out, "{}\t{}\t", vocab.token(w), self.content_prob[w]);
            for (z, p) in self.topic_given_word(w).iter().enumerate() {
                if z > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{p}");
            }
            out.push('\n');
        }
        out
    }

    /// Reads the export format; rows are placed by vocabulary id, and words
    /// missing from the file keep the out-of-vocabulary fallback.
    pub fn from_text(text: &str, vocab: &Vocabulary) -> Result<Self> {
        let mut rows: Vec<Option<(f64, Vec<f64>)>> = vec![None; vocab.len()];
        let mut k = None;
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut f = line.split('\t');
            let (Some(word), Some(c), Some(dist), None) = (f.next(), f.next(), f.next(), f.next()) else {
                return Err(Error::parse(i + 1, "expected word<TAB>p<TAB>p1,...,pK"));
            };
            let c: f64 = c.parse().map_err(|_| Error::parse(i + 1, "bad content probability"))?;
            let dist: Vec<f64> = dist
                .split(',')
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(i + 1, "bad topic distribution"))?;
            if *k.get_or_insert(dist.len()) != dist.len() {
                return Err(Error::parse(i + 1, "inconsistent topic count"));
            }
            let id = vocab
                .get(word)
                .ok_or_else(|| Error::parse(i + 1, format!("word {word:?} not in vocabulary")))?;
            rows[id] = Some((c, dist));
        }
        let k = k.ok_or(Error::Empty("word topic file"))?;
        let uniform = vec![1.0 / k as f64; k];
        Self::from_rows(k, rows.into_iter().map(|r| r.unwrap_or((0.0, uniform.clone()))).collect())
    }
}

/// Topic mixture of a sentence and its expected content-word count `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceTopics {
    pub dist: Vec<f64>,
    pub content_mass: f64,
    /// Set when `Z` is below [`MIN_CONTENT_MASS`]; `dist` is then uniform,
    /// `content_mass` is 0, and the topic constraint contributes nothing.
    pub degenerate: bool,
}

/// `P(T|S) = (1/Z) Σ_w P(T|w) P(C=0|w)` with `Z = Σ_w P(C=0|w)`.
pub fn sentence_topic_dist(stats: &WordTopicStats, sentence: &[usize]) -> SentenceTopics {
    let k = stats.num_topics();
    let mut dist = vec![0.0; k];
    let mut z = 0.0;
    for &w in sentence {
        let c = stats.content_prob(w);
        if c == 0.0 {
            continue;
        }
        z += c;
        for (acc, p) in dist.iter_mut().zip(stats.topic_given_word(w)) {
            *acc += c * p;
        }
    }
    if z < MIN_CONTENT_MASS {
        return SentenceTopics {
            dist: vec![1.0 / k as f64; k],
            content_mass: 0.0,
            degenerate: true,
        };
    }
    dist.iter_mut().for_each(|p| *p /= z);
    SentenceTopics {
        dist,
        content_mass: z,
        degenerate: false,
    }
}

/// The `n` words with the highest topic emission `φ^(z)`, skipping reserved
/// vocabulary ids and anything in `exclude`. Ties go to the lower id.
pub fn top_topic_words(
    model: &HmmLdaModel,
    topic: usize,
    n: usize,
    exclude: &HashSet<usize>,
) -> Result<Vec<usize>> {
    if topic >= model.num_topics() {
        return Err(Error::OutOfRange { what: "topic", value: topic });
    }
    let mut words: Vec<usize> = (0..model.vocab_size())
        .filter(|w| !Vocabulary::is_reserved(*w) && !exclude.contains(w))
        .collect();
    // φ^(z)_w shares its denominator across words, so counts order it.
    words.sort_by(|&a, &b| {
        model
            .topic_word_count(topic, b)
            .cmp(&model.topic_word_count(topic, a))
            .then(a.cmp(&b))
    });
    words.truncate(n);
    Ok(words)
}

#[cfg(test)]
mod tests {
    use super::super::{HmmLdaConfig, HmmLdaState};
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> HmmLdaConfig {
        HmmLdaConfig { num_classes: 2, beta: 0.1, ..HmmLdaConfig::with_topics(4) }
    }

    #[test]
    fn always_content_word_peaks_at_its_topic() {
        // word 5 appears 4 times, always class 0 topic 3; word 6 always class 1.
        let docs = vec![vec![vec![5, 6, 5], vec![5, 6, 5]]];
        let a = [(3, 0), (0, 1), (3, 0), (3, 0), (1, 1), (3, 0)];
        let s = HmmLdaState::from_assignments(&cfg(), &docs, 8, &a).unwrap();
        let st = word_stats(s.model(), 0.1);
        assert_eq!(st.content_prob(5), 1.0);
        let expect_peak = (4.0 + 0.1) / (4.0 + 4.0 * 0.1);
        let expect_rest = 0.1 / (4.0 + 4.0 * 0.1);
        let row = st.topic_given_word(5);
        assert!((row[3] - expect_peak).abs() < 1e-15);
        for z in 0..3 {
            assert!((row[z] - expect_rest).abs() < 1e-15);
        }
        assert_eq!(st.content_prob(6), 0.0);
        assert_eq!(st.topic_given_word(6), &[0.25; 4]);
        assert_eq!(st.content_prob(7), 0.0);
        assert_eq!(st.content_prob(100), 0.0);
        assert_eq!(st.topic_given_word(100), &[0.25; 4]);
    }

    fn two_word_stats() -> WordTopicStats {
        WordTopicStats::from_rows(
            2,
            vec![(0.5, vec![1.0, 0.0]), (0.25, vec![0.0, 1.0]), (0.0, vec![0.5, 0.5])],
        )
        .unwrap()
    }

    #[test]
    fn sentence_mixture_hand_values() {
        let st = two_word_stats();
        let s = sentence_topic_dist(&st, &[0, 1]);
        assert!(!s.degenerate);
        assert!((s.content_mass - 0.75).abs() < 1e-15);
        assert!((s.dist[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.dist[1] - 1.0 / 3.0).abs() < 1e-15);
        let one = sentence_topic_dist(&st, &[0]);
        assert_eq!(one.dist, vec![1.0, 0.0]);
        let stop = sentence_topic_dist(&st, &[2, 2]);
        assert!(stop.degenerate);
        assert_eq!(stop.content_mass, 0.0);
        assert!(sentence_topic_dist(&st, &[]).degenerate);
    }

    #[test]
    fn top_words_sorted_by_emission_with_id_ties() {
        // topic 0 counts: word 4 ×3, word 5 ×1, word 6 ×3, word 7 ×2
        let docs = vec![vec![vec![4, 4, 4, 5, 6, 6, 6, 7, 7]]];
        let a = vec![(0, 0); 9];
        let s = HmmLdaState::from_assignments(&cfg(), &docs, 9, &a).unwrap();
        let none = HashSet::new();
        assert_eq!(top_topic_words(s.model(), 0, 3, &none).unwrap(), [4, 6, 7]);
        assert_eq!(top_topic_words(s.model(), 0, 5, &none).unwrap(), [4, 6, 7, 5, 8]);
        let stop: HashSet<usize> = [6].into();
        assert_eq!(top_topic_words(s.model(), 0, 2, &stop).unwrap(), [4, 7]);
        assert!(top_topic_words(s.model(), 0, 0, &none).unwrap().is_empty());
        assert!(top_topic_words(s.model(), 4, 1, &none).is_err());
    }

    #[test]
    fn text_round_trip() {
        let pairs = crate::corpus::parse_pairs("a b\tc\n", false).unwrap();
        let vocab = Vocabulary::build(&pairs, 1).unwrap();
        let mut rows = vec![(0.0, vec![0.5, 0.5]); vocab.len()];
        rows[vocab.id("a")] = (0.75, vec![0.25, 0.75]);
        let st = WordTopicStats::from_rows(2, rows).unwrap();
        let back = WordTopicStats::from_text(&st.to_text(&vocab), &vocab).unwrap();
        assert_eq!(back, st);
        assert!(WordTopicStats::from_text("zzz\t0.5\t0.5,0.5\n", &vocab).is_err());
    }

    proptest! {
        #[test]
        fn mixture_is_a_simplex(
            rows in proptest::collection::vec((0.0f64..1.0, proptest::collection::vec(0.01f64..1.0, 3)), 1..10),
            sentence in proptest::collection::vec(0usize..12, 0..8),
        ) {
            let rows: Vec<_> = rows.into_iter().map(|(c, d)| {
                let s: f64 = d.iter().sum();
                (c, d.into_iter().map(|x| x / s).collect())
            }).collect();
            let st = WordTopicStats::from_rows(3, rows).unwrap();
            let out = sentence_topic_dist(&st, &sentence);
            if !out.degenerate {
                prop_assert!((out.dist.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                prop_assert!(out.dist.iter().all(|&p| p >= 0.0));
            }
        }

        #[test]
        fn relabeling_topics_permutes_word_stats(
            seed in any::<u64>(),
            perm_seed in 0usize..6,
        ) {
            let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            let perm = perms[perm_seed];
            let docs = vec![vec![vec![0, 1, 2, 3]], vec![vec![2, 4, 4], vec![1, 0]]];
            let c = HmmLdaConfig { num_classes: 3, seed, ..HmmLdaConfig::with_topics(3) };
            let mut s = HmmLdaState::initialize(&c, &docs, 5).unwrap();
            s.gibbs_sweep();
            let relabeled: Vec<_> = s.assignments().into_iter().map(|(z, c)| (perm[z], c)).collect();
            let t = HmmLdaState::from_assignments(&c, &docs, 5, &relabeled).unwrap();
            let a = word_stats(s.model(), 0.01);
            let b = word_stats(t.model(), 0.01);
            for w in 0..5 {
                prop_assert_eq!(a.content_prob(w), b.content_prob(w));
                for z in 0..3 {
                    prop_assert_eq!(a.topic_given_word(w)[z], b.topic_given_word(w)[perm[z]]);
                }
            }
        }
    }
}
