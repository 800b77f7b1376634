use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Document, HmmLdaConfig, HmmLdaModel};
use crate::util::sample_weighted;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Slot {
    word: usize,
    topic: usize,
    class: usize,
}

/// Token assignments plus the count tables they induce.
#[derive(Debug, Clone)]
pub struct HmmLdaState {
    model: HmmLdaModel,
    docs: Vec<Vec<Vec<Slot>>>,
    rng: ChaCha8Rng,
    topic_buf: Vec<f64>,
    class_buf: Vec<f64>,
    joint_buf: Vec<f64>,
}

impl HmmLdaState {
    /// Sequential start seeded by `config.seed`: tokens are placed in
    /// order, each drawn from its joint conditional given the tokens
    /// already placed and the class to its left. Empty utterances are
    /// dropped.
    ///
    /// A uniformly random start tends to settle in a mode where content
    /// words sit in syntax classes.
    pub fn initialize(config: &HmmLdaConfig, documents: &[Document], vocab_size: usize) -> Result<Self> {
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut s = Self::build(config, documents, vocab_size, rng, |_, _, _| (0, 0))?;
        s.model = HmmLdaModel::zeros(config, vocab_size, documents.len());
        let b = s.model.boundary();
        for d in 0..s.docs.len() {
            for u in 0..s.docs[d].len() {
                let mut prev = b;
                for i in 0..s.docs[d][u].len() {
                    let word = s.docs[d][u][i].word;
                    s.fill_joint_weights(d, word, |m, c| m.trans[prev * (m.num_classes() + 1) + c] as f64 + m.config.gamma);
                    let slot = Slot { word, ..s.draw_joint(d) };
                    add_token(&mut s.model, d, &slot);
                    add_transition(&mut s.model, prev, slot.class);
                    prev = slot.class;
                    s.docs[d][u][i] = slot;
                }
                add_transition(&mut s.model, prev, b);
            }
        }
        Ok(s)
    }

    /// State with explicit `(topic, class)` per token, in document /
    /// utterance / position order.
    pub fn from_assignments(
        config: &HmmLdaConfig,
        documents: &[Document],
        vocab_size: usize,
        assignments: &[(usize, usize)],
    ) -> Result<Self> {
        let total: usize = documents.iter().flatten().map(Vec::len).sum();
        if assignments.len() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                got: assignments.len(),
            });
        }
        for &(z, c) in assignments {
            if z >= config.num_topics {
                return Err(Error::OutOfRange { what: "topic", value: z });
            }
            if c >= config.num_classes {
                return Err(Error::OutOfRange { what: "class", value: c });
            }
        }
        let mut it = assignments.iter().copied();
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Self::build(config, documents, vocab_size, rng, |_, _, _| {
            it.next().expect("length checked")
        })
    }

    fn build(
        config: &HmmLdaConfig,
        documents: &[Document],
        vocab_size: usize,
        rng: ChaCha8Rng,
        mut assign: impl FnMut(usize, usize, usize) -> (usize, usize),
    ) -> Result<Self> {
        config.validate_sampler()?;
        if documents.is_empty() {
            return Err(Error::Empty("document list"));
        }
        let mut docs = Vec::with_capacity(documents.len());
        for (d, doc) in documents.iter().enumerate() {
            let mut utts = Vec::with_capacity(doc.len());
            for (u, utt) in doc.iter().enumerate() {
                let mut slots = Vec::with_capacity(utt.len());
                for (i, &word) in utt.iter().enumerate() {
                    if word >= vocab_size {
                        return Err(Error::OutOfRange { what: "word id", value: word });
                    }
                    let (topic, class) = assign(d, u, i);
                    slots.push(Slot { word, topic, class });
                }
                if !slots.is_empty() {
                    utts.push(slots);
                }
            }
            docs.push(utts);
        }
        let mut state = Self {
            model: HmmLdaModel::zeros(config, vocab_size, documents.len()),
            docs,
            rng,
            topic_buf: vec![0.0; config.num_topics],
            class_buf: vec![0.0; config.num_classes],
            joint_buf: vec![0.0; config.num_topics + config.num_classes - 1],
        };
        state.model = state.recount();
        Ok(state)
    }

    pub fn model(&self) -> &HmmLdaModel {
        &self.model
    }

    pub fn into_model(self) -> HmmLdaModel {
        self.model
    }

    /// `(topic, class)` of every token in document / utterance / position order.
    pub fn assignments(&self) -> Vec<(usize, usize)> {
        self.docs
            .iter()
            .flatten()
            .flatten()
            .map(|s| (s.topic, s.class))
            .collect()
    }

    /// Count tables tallied from scratch from the assignments.
    pub fn recount(&self) -> HmmLdaModel {
        let m = &self.model;
        let mut fresh = HmmLdaModel::zeros(&m.config, m.vocab_size, m.num_docs);
        let b = fresh.boundary();
        for (d, doc) in self.docs.iter().enumerate() {
            for utt in doc {
                let mut prev = b;
                for s in utt {
                    add_token(&mut fresh, d, s);
                    add_transition(&mut fresh, prev, s.class);
                    prev = s.class;
                }
                add_transition(&mut fresh, prev, b);
            }
        }
        fresh
    }

    /// Resamples every token's `(topic, class)` pair as one block from
    /// its joint collapsed conditional.
    ///
    /// Alternating single-variable updates leave a content word stranded in
    /// a syntax class: its topic then drifts with the document prior, so a
    /// move back to class 0 is judged under an unrelated topic. The block
    /// update scores every `(z, 0)` directly and targets the same posterior.
    pub fn gibbs_sweep(&mut self) {
        for d in 0..self.docs.len() {
            for u in 0..self.docs[d].len() {
                for i in 0..self.docs[d][u].len() {
                    self.resample_joint(d, u, i);
                }
            }
        }
    }

    /// One sweep of the alternating updates: topic given class, then class
    /// given topic.
    pub fn alternating_sweep(&mut self) {
        for d in 0..self.docs.len() {
            for u in 0..self.docs[d].len() {
                for i in 0..self.docs[d][u].len() {
                    self.resample_topic(d, u, i);
                    self.resample_class(d, u, i);
                }
            }
        }
    }

    fn resample_joint(&mut self, d: usize, u: usize, i: usize) {
        let slot = self.docs[d][u][i];
        let (prev, next) = self.neighbours(d, u, i);
        remove_token(&mut self.model, d, &slot);
        remove_transition(&mut self.model, prev, slot.class);
        remove_transition(&mut self.model, slot.class, next);
        self.fill_joint_weights(d, slot.word, |m, c| transition_factor(m, prev, c, next));
        let Slot { topic, class, .. } = self.draw_joint(d);
        let slot = Slot { topic, class, ..slot };
        add_token(&mut self.model, d, &slot);
        add_transition(&mut self.model, prev, class);
        add_transition(&mut self.model, class, next);
        self.docs[d][u][i] = slot;
    }

    /// `trans(m, c)` is the transition factor for class `c`.
    fn fill_joint_weights(&mut self, d: usize, word: usize, trans: impl Fn(&HmmLdaModel, usize) -> f64) {
        let m = &self.model;
        let k = m.num_topics();
        let alpha = m.config.alpha;
        let doc = &m.doc_topic[d * k..(d + 1) * k];
        let to_topic = trans(m, 0);
        for z in 0..k {
            self.joint_buf[z] = (doc[z] as f64 + alpha) * m.topic_emission(z, word) * to_topic;
        }
        // for c >= 1 the topic only enters through the document prior, which sums out
        let prior_mass = doc.iter().map(|&n| n as f64).sum::<f64>() + k as f64 * alpha;
        for c in 1..m.num_classes() {
            self.joint_buf[k + c - 1] = prior_mass * m.class_emission(c, word) * trans(m, c);
        }
    }

    /// Draws `(topic, class)` from `joint_buf`; the word field is unset.
    fn draw_joint(&mut self, d: usize) -> Slot {
        let k = self.model.num_topics();
        let pick = sample_weighted(&mut self.rng, &self.joint_buf);
        if pick < k {
            return Slot { word: 0, topic: pick, class: 0 };
        }
        let alpha = self.model.config.alpha;
        for z in 0..k {
            self.topic_buf[z] = self.model.doc_topic[d * k + z] as f64 + alpha;
        }
        let topic = sample_weighted(&mut self.rng, &self.topic_buf);
        Slot { word: 0, topic, class: pick - k + 1 }
    }

    fn neighbours(&self, d: usize, u: usize, i: usize) -> (usize, usize) {
        let utt = &self.docs[d][u];
        let b = self.model.boundary();
        let prev = if i == 0 { b } else { utt[i - 1].class };
        let next = utt.get(i + 1).map_or(b, |s| s.class);
        (prev, next)
    }

    fn resample_topic(&mut self, d: usize, u: usize, i: usize) {
        let slot = self.docs[d][u][i];
        remove_token(&mut self.model, d, &slot);
        self.fill_topic_weights(d, &slot);
        let topic = sample_weighted(&mut self.rng, &self.topic_buf);
        let slot = Slot { topic, ..slot };
        add_token(&mut self.model, d, &slot);
        self.docs[d][u][i] = slot;
    }

    fn fill_topic_weights(&mut self, d: usize, slot: &Slot) {
        let m = &self.model;
        let k = m.num_topics();
        let alpha = m.config.alpha;
        for z in 0..k {
            let prior = m.doc_topic[d * k + z] as f64 + alpha;
            self.topic_buf[z] = if slot.class == 0 {
                prior * m.topic_emission(z, slot.word)
            } else {
                prior
            };
        }
    }

    fn resample_class(&mut self, d: usize, u: usize, i: usize) {
        let slot = self.docs[d][u][i];
        let (prev, next) = self.neighbours(d, u, i);
        remove_emission(&mut self.model, &slot);
        remove_transition(&mut self.model, prev, slot.class);
        remove_transition(&mut self.model, slot.class, next);
        self.fill_class_weights(&slot, prev, next);
        let class = sample_weighted(&mut self.rng, &self.class_buf);
        let slot = Slot { class, ..slot };
        add_emission(&mut self.model, &slot);
        add_transition(&mut self.model, prev, class);
        add_transition(&mut self.model, class, next);
        self.docs[d][u][i] = slot;
    }

    /// Assumes the token's emission and both adjacent transitions are
    /// already removed from the counts.
    fn fill_class_weights(&mut self, slot: &Slot, prev: usize, next: usize) {
        let m = &self.model;
        for c in 0..m.num_classes() {
            let emission = if c == 0 {
                m.topic_emission(slot.topic, slot.word)
            } else {
                m.class_emission(c, slot.word)
            };
            self.class_buf[c] = emission * transition_factor(m, prev, c, next);
        }
    }

    /// Normalized class conditional of one token given all others. The
    /// state is left unchanged.
    pub fn class_conditional(&mut self, doc: usize, utterance: usize, position: usize) -> Vec<f64> {
        let slot = self.docs[doc][utterance][position];
        let (prev, next) = self.neighbours(doc, utterance, position);
        remove_emission(&mut self.model, &slot);
        remove_transition(&mut self.model, prev, slot.class);
        remove_transition(&mut self.model, slot.class, next);
        self.fill_class_weights(&slot, prev, next);
        add_emission(&mut self.model, &slot);
        add_transition(&mut self.model, prev, slot.class);
        add_transition(&mut self.model, slot.class, next);
        normalize(&self.class_buf)
    }

    /// Normalized topic conditional of one token given all others.
    pub fn topic_conditional(&mut self, doc: usize, utterance: usize, position: usize) -> Vec<f64> {
        let slot = self.docs[doc][utterance][position];
        remove_token(&mut self.model, doc, &slot);
        self.fill_topic_weights(doc, &slot);
        add_token(&mut self.model, doc, &slot);
        normalize(&self.topic_buf)
    }
}

fn normalize(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

/// `(n[prev,c]+γ)(n[c,next]+γ+1[prev=c=next]) / (n[c,·]+(C+1)γ+1[prev=c])`
/// with the token's own transitions already removed.
fn transition_factor(m: &HmmLdaModel, prev: usize, c: usize, next: usize) -> f64 {
    let stride = m.num_classes() + 1;
    let gamma = m.config.gamma;
    let same_prev = f64::from(u8::from(prev == c));
    let same_all = f64::from(u8::from(prev == c && c == next));
    let into = m.trans[prev * stride + c] as f64 + gamma;
    let out = (m.trans[c * stride + next] as f64 + gamma + same_all)
        / (m.trans_out[c] as f64 + stride as f64 * gamma + same_prev);
    into * out
}

fn add_emission(m: &mut HmmLdaModel, s: &Slot) {
    let v = m.vocab_size;
    if s.class == 0 {
        m.topic_word[s.topic * v + s.word] += 1;
        m.topic_total[s.topic] += 1;
    } else {
        m.class_word[s.class * v + s.word] += 1;
        m.class_total[s.class] += 1;
    }
}

fn remove_emission(m: &mut HmmLdaModel, s: &Slot) {
    let v = m.vocab_size;
    if s.class == 0 {
        m.topic_word[s.topic * v + s.word] -= 1;
        m.topic_total[s.topic] -= 1;
    } else {
        m.class_word[s.class * v + s.word] -= 1;
        m.class_total[s.class] -= 1;
    }
}

fn add_token(m: &mut HmmLdaModel, d: usize, s: &Slot) {
    let k = m.num_topics();
    m.doc_topic[d * k + s.topic] += 1;
    add_emission(m, s);
}

fn remove_token(m: &mut HmmLdaModel, d: usize, s: &Slot) {
    let k = m.num_topics();
    m.doc_topic[d * k + s.topic] -= 1;
    remove_emission(m, s);
}

fn add_transition(m: &mut HmmLdaModel, from: usize, to: usize) {
    let stride = m.num_classes() + 1;
    m.trans[from * stride + to] += 1;
    m.trans_out[from] += 1;
}

fn remove_transition(m: &mut HmmLdaModel, from: usize, to: usize) {
    let stride = m.num_classes() + 1;
    m.trans[from * stride + to] -= 1;
    m.trans_out[from] -= 1;
}
