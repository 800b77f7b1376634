//! Fixtures and reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use dcgen_core::corpus::{tokenize, DialoguePair, StopList, BOS, EOS, NULL, UNK};
use dcgen_core::decoder::DecoderConfig;
use dcgen_core::langmodel::ConditionalLm;
use dcgen_core::sif::{similarity, SifModel};
use dcgen_core::topic_syntax::{sentence_topic_dist, HmmLdaConfig, WordTopicStats, MIN_CONTENT_MASS};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

pub const FIRST_WORD: usize = 4;

/// Conditional model with pseudo-random next-token distributions keyed on
/// (seed, source, prefix). Reserved ids other than EOS get zero mass.
pub struct HashLm {
    pub n: usize,
    pub seed: u64,
}

impl ConditionalLm for HashLm {
    fn num_outputs(&self) -> usize {
        self.n
    }

    fn next_logprobs(&self, source: &[usize], prefix: &[usize]) -> Vec<f64> {
        let mut h = DefaultHasher::new();
        (self.seed, source, prefix).hash(&mut h);
        let mut rng = ChaCha8Rng::seed_from_u64(h.finish());
        let mut p: Vec<f64> = (0..self.n).map(|_| rng.gen_range(0.02..1.0f64).powi(2)).collect();
        for r in [UNK, BOS, NULL] {
            p[r] = 0.0;
        }
        let z: f64 = p.iter().sum();
        p.iter().map(|x| (x / z).ln()).collect()
    }
}

/// Random per-word topic statistics; roughly a quarter of the regular
/// words are pure function words.
pub fn random_stats(rng: &mut ChaCha8Rng, k: usize, v: usize) -> WordTopicStats {
    let rows = (0..v)
        .map(|w| {
            let mut d: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..1.0)).collect();
            let s: f64 = d.iter().sum();
            d.iter_mut().for_each(|x| *x /= s);
            let c = if w < FIRST_WORD || rng.gen_bool(0.25) { 0.0 } else { rng.gen_range(0.05..1.0) };
            (c, d)
        })
        .collect();
    WordTopicStats::from_rows(k, rows).unwrap()
}

/// Random SIF model; some regular words have no vector.
pub fn random_sif(rng: &mut ChaCha8Rng, dim: usize, v: usize) -> SifModel {
    let vectors = (0..v)
        .map(|w| {
            (w >= FIRST_WORD && rng.gen_bool(0.85)).then(|| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        })
        .collect();
    let mut unigram: Vec<f64> = (0..v).map(|w| if w < FIRST_WORD { 0.0 } else { rng.gen_range(0.1..1.0) }).collect();
    let s: f64 = unigram.iter().sum();
    unigram.iter_mut().for_each(|x| *x /= s);
    let mut u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    u.iter_mut().for_each(|x| *x /= n);
    SifModel::with_component(dim, vectors, unigram, 1e-3, Some(u)).unwrap()
}

/// `T` recomputed from the whole response: `P(T|Y) · P(T|X)`.
pub fn batch_topic(stats: &WordTopicStats, source: &[usize], y: &[usize], cfg: &DecoderConfig) -> f64 {
    let tx = sentence_topic_dist(stats, source);
    let ty = sentence_topic_dist(stats, y);
    if tx.degenerate || ty.content_mass < MIN_CONTENT_MASS || y.len() < cfg.constraint_start_step {
        return 0.0;
    }
    tx.dist.iter().zip(&ty.dist).map(|(a, b)| a * b).sum()
}

/// `S` recomputed from the whole response: `Emb(X) · Emb(Y)`.
pub fn batch_semantic(sif: &SifModel, source: &[usize], y: &[usize], cfg: &DecoderConfig) -> f64 {
    if y.len() < cfg.constraint_start_step {
        return 0.0;
    }
    similarity(&sif.embed(source), &sif.embed(y)).unwrap()
}

fn admissible(w: usize) -> bool {
    !(w == EOS || w == BOS || w == NULL || w == UNK)
}

/// Plain likelihood beam search written independently of the decoder:
/// every expansion is materialized and fully sorted each step.
pub fn vanilla_beam<L: ConditionalLm>(lm: &L, source: &[usize], cfg: &DecoderConfig) -> Vec<(Vec<usize>, f64)> {
    let mut live: Vec<(Vec<usize>, f64)> = vec![(Vec::new(), 0.0)];
    let mut done: Vec<(Vec<usize>, f64)> = Vec::new();
    while !live.is_empty() && done.len() < cfg.beam_size {
        let mut ex: Vec<(Vec<usize>, f64)> = Vec::new();
        for (y, ll) in &live {
            let lps = lm.next_logprobs(source, y);
            if y.len() >= cfg.min_len && lps[EOS].is_finite() {
                let mut z = y.clone();
                z.push(EOS);
                ex.push((z, ll + lps[EOS]));
            }
            if y.len() < cfg.max_len {
                for (w, &lp) in lps.iter().enumerate() {
                    if admissible(w) && lp.is_finite() {
                        let mut z = y.clone();
                        z.push(w);
                        ex.push((z, ll + lp));
                    }
                }
            }
        }
        if ex.is_empty() {
            break;
        }
        ex.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ex.truncate(cfg.beam_size);
        live.clear();
        for (mut y, s) in ex {
            if y.last() == Some(&EOS) {
                y.pop();
                done.push((y, s));
            } else {
                live.push((y, s));
            }
        }
    }
    done.sort_by(|a, b| {
        let ka = a.0.iter().chain([EOS].iter());
        b.1.total_cmp(&a.1).then(ka.cmp(b.0.iter().chain([EOS].iter())))
    });
    done
}

/// Every response of `min_len..=max_len` words from `words`, scored from
/// scratch under the full objective, best first.
pub fn exhaustive<L: ConditionalLm>(
    lm: &L,
    stats: &WordTopicStats,
    sif: &SifModel,
    source: &[usize],
    words: &[usize],
    cfg: &DecoderConfig,
) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for len in 1..=cfg.max_len {
        frontier = frontier
            .iter()
            .flat_map(|y| words.iter().map(move |&w| [y.as_slice(), &[w]].concat()))
            .collect();
        if len >= cfg.min_len {
            for y in &frontier {
                let s = lm.sequence_logprob(source, y)
                    + cfg.alpha * batch_topic(stats, source, y, cfg)
                    + cfg.beta * batch_semantic(sif, source, y, cfg);
                out.push((y.clone(), s));
            }
        }
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1));
    out
}

/// Collapsed joint `log p(w, z, c)` of an HMM-LDA assignment, written from
/// the Dirichlet-multinomial marginals.
pub fn hmmlda_log_joint(docs: &[Vec<Vec<usize>>], v: usize, cfg: &HmmLdaConfig, assign: &[(usize, usize)]) -> f64 {
    let (k, c) = (cfg.num_topics, cfg.num_classes);
    let s = c + 1;
    let mut n_zw = vec![vec![0usize; v]; k];
    let mut n_cw = vec![vec![0usize; v]; c];
    let mut n_tr = vec![vec![0usize; s]; s];
    let mut lp = 0.0;
    let mut it = assign.iter();
    for doc in docs {
        let mut n_dz = vec![0usize; k];
        for utt in doc {
            let mut prev = c;
            for &w in utt {
                let &(z, cl) = it.next().unwrap();
                n_dz[z] += 1;
                if cl == 0 {
                    n_zw[z][w] += 1;
                } else {
                    n_cw[cl][w] += 1;
                }
                n_tr[prev][cl] += 1;
                prev = cl;
            }
            n_tr[prev][c] += 1;
        }
        lp += dm(&n_dz, cfg.alpha);
    }
    for row in &n_zw {
        lp += dm(row, cfg.beta);
    }
    for row in &n_cw[1..] {
        lp += dm(row, cfg.delta);
    }
    for row in &n_tr {
        lp += dm(row, cfg.gamma);
    }
    lp
}

/// Log Dirichlet-multinomial marginal with symmetric prior `a`.
fn dm(counts: &[usize], a: f64) -> f64 {
    let n: usize = counts.iter().sum();
    let k = counts.len() as f64;
    ln_gamma(k * a) - ln_gamma(k * a + n as f64) + counts.iter().map(|&x| ln_gamma(x as f64 + a) - ln_gamma(a)).sum::<f64>()
}

/// All `(K·C)^n` assignments of `n` tokens, first token varying slowest.
pub fn all_assignments(n: usize, k: usize, c: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|a| {
                (0..k * c).map(move |s| {
                    let mut b = a.clone();
                    b.push((s / c, s % c));
                    b
                })
            })
            .collect();
    }
    out
}

pub fn assignment_index(a: &[(usize, usize)], k: usize, c: usize) -> usize {
    a.iter().fold(0, |acc, &(z, cl)| acc * k * c + z * c + cl)
}

/// Synthetic Cornell-style corpus. Each conversation keeps one latent
/// topic; utterances are either dull generic replies or template sentences
/// whose content slots take that topic's words. Pairs are consecutive turns.
pub struct Synth {
    pub pairs: usize,
    pub topics: usize,
    pub words_per_topic: usize,
    pub dull_frac: f64,
    pub seed: u64,
}

pub const DULL: [&str; 10] = [
    "i don't know .",
    "i'm not sure .",
    "what ?",
    "i don't know what you mean .",
    "what do you mean ?",
    "me too .",
    "yes .",
    "no .",
    "who are you ?",
    "i am not sure about that .",
];

/// `X` and `Y` are content slots.
pub const TEMPLATES: [&str; 10] = [
    "i like the X .",
    "have you got my X ?",
    "the X was really Y .",
    "we can go to the X .",
    "what about the X and the Y ?",
    "i think your X is so Y .",
    "they just do it with a X .",
    "that X of yours is Y .",
    "where is the X ?",
    "how was the X at the Y ?",
];

const SYLLABLES: [&str; 12] = ["ba", "ko", "ti", "mu", "re", "sa", "nu", "pe", "lo", "vi", "da", "zo"];

pub fn content_word(topic: usize, i: usize) -> String {
    let n = topic * 1000 + i;
    let s = SYLLABLES.len();
    format!("{}{}{}{}", SYLLABLES[n % s], SYLLABLES[(n / s) % s], SYLLABLES[(n / s / s) % s], SYLLABLES[(n / s / s / s) % s])
}

impl Synth {
    pub fn generate(&self) -> Vec<DialoguePair> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut pairs = Vec::with_capacity(self.pairs);
        while pairs.len() < self.pairs {
            let t = rng.gen_range(0..self.topics);
            let turns = rng.gen_range(8..=16);
            let mut prev = self.topical(&mut rng, t);
            for _ in 1..turns {
                if pairs.len() == self.pairs {
                    break;
                }
                let next = if rng.gen_bool(self.dull_frac) {
                    tokenize(DULL.choose(&mut rng).unwrap())
                } else {
                    self.topical(&mut rng, t)
                };
                pairs.push(DialoguePair::new(prev, next.clone()).unwrap());
                prev = next;
            }
        }
        pairs
    }

    /// One to three template sentences on `topic`.
    fn topical(&self, rng: &mut ChaCha8Rng, topic: usize) -> Vec<String> {
        let mut out = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            for tok in TEMPLATES.choose(rng).unwrap().split(' ') {
                match tok {
                    "X" | "Y" => out.push(content_word(topic, rng.gen_range(0..self.words_per_topic))),
                    w => out.push(w.to_string()),
                }
            }
        }
        out
    }
}

/// Sanity check that the generator's function words are stop words and its
/// content words are not.
pub fn synth_vocabulary_is_separated(s: &Synth, stop: &StopList) -> bool {
    let dull_ok = DULL.iter().flat_map(|d| tokenize(d)).all(|w| stop.contains(&w));
    let fn_ok = TEMPLATES.iter().flat_map(|t| tokenize(t)).filter(|w| w != "x" && w != "y").all(|w| stop.contains(&w));
    let content_ok = (0..s.topics).all(|t| (0..s.words_per_topic).all(|i| !stop.contains(&content_word(t, i))));
    dull_ok && fn_ok && content_ok
}

pub mod pipeline;
