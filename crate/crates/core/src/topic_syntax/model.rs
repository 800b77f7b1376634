use std::fmt::Write as _;

use statrs::function::gamma::ln_gamma;

use super::HmmLdaConfig;
use crate::{Error, Result};

/// Count tables and hyperpriors of a trained HMM-LDA model.
///
/// Transition rows and columns `0..C` are classes; index `C` is the
/// utterance boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmLdaModel {
    pub(crate) config: HmmLdaConfig,
    pub(crate) vocab_size: usize,
    pub(crate) num_docs: usize,
    /// `D × K`, over every token regardless of class.
    pub(crate) doc_topic: Vec<u32>,
    /// `K × V`, class-0 tokens only.
    pub(crate) topic_word: Vec<u32>,
    pub(crate) topic_total: Vec<u32>,
    /// `C × V`; row 0 stays empty.
    pub(crate) class_word: Vec<u32>,
    pub(crate) class_total: Vec<u32>,
    /// `(C+1) × (C+1)`.
    pub(crate) trans: Vec<u32>,
    pub(crate) trans_out: Vec<u32>,
}

impl HmmLdaModel {
    pub(crate) fn zeros(config: &HmmLdaConfig, vocab_size: usize, num_docs: usize) -> Self {
        let k = config.num_topics;
        let c = config.num_classes;
        Self {
            config: config.clone(),
            vocab_size,
            num_docs,
            doc_topic: vec![0; num_docs * k],
            topic_word: vec![0; k * vocab_size],
            topic_total: vec![0; k],
            class_word: vec![0; c * vocab_size],
            class_total: vec![0; c],
            trans: vec![0; (c + 1) * (c + 1)],
            trans_out: vec![0; c + 1],
        }
    }

    pub fn config(&self) -> &HmmLdaConfig {
        &self.config
    }

    pub fn num_topics(&self) -> usize {
        self.config.num_topics
    }

    pub fn num_classes(&self) -> usize {
        self.config.num_classes
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn num_docs(&self) -> usize {
        self.num_docs
    }

    pub(crate) fn boundary(&self) -> usize {
        self.config.num_classes
    }

    pub fn doc_topic_count(&self, doc: usize, topic: usize) -> u32 {
        self.doc_topic[doc * self.num_topics() + topic]
    }

    /// Class-0 occurrences of `word` under `topic`.
    pub fn topic_word_count(&self, topic: usize, word: usize) -> u32 {
        self.topic_word[topic * self.vocab_size + word]
    }

    pub fn class_word_count(&self, class: usize, word: usize) -> u32 {
        self.class_word[class * self.vocab_size + word]
    }

    /// Transitions `from → to`; pass `num_classes()` for the boundary.
    pub fn transition_count(&self, from: usize, to: usize) -> u32 {
        self.trans[from * (self.num_classes() + 1) + to]
    }

    /// Topic emission `φ^(z)_w`.
    pub fn topic_emission(&self, topic: usize, word: usize) -> f64 {
        let b = self.config.beta;
        (self.topic_word_count(topic, word) as f64 + b)
            / (self.topic_total[topic] as f64 + self.vocab_size as f64 * b)
    }

    /// Class emission `φ^(c)_w` for `class >= 1`.
    pub fn class_emission(&self, class: usize, word: usize) -> f64 {
        let d = self.config.delta;
        (self.class_word_count(class, word) as f64 + d)
            / (self.class_total[class] as f64 + self.vocab_size as f64 * d)
    }

    /// Collapsed log joint `ln p(w, z, c)` with every multinomial
    /// integrated out. Compares chains run on the same corpus.
    pub fn log_joint(&self) -> f64 {
        let (k, c, v) = (self.num_topics(), self.num_classes(), self.vocab_size);
        let cfg = &self.config;
        let mut lp: f64 = self.doc_topic.chunks(k).map(|row| dirichlet_multinomial(row, cfg.alpha)).sum();
        lp += self.topic_word.chunks(v).map(|row| dirichlet_multinomial(row, cfg.beta)).sum::<f64>();
        lp += self.class_word.chunks(v).skip(1).map(|row| dirichlet_multinomial(row, cfg.delta)).sum::<f64>();
        lp + self.trans.chunks(c + 1).map(|row| dirichlet_multinomial(row, cfg.gamma)).sum::<f64>()
    }

    /// Serializes to the `HMMLDA v1` text format: a header of sizes and
    /// priors, then one section of `row<TAB>col<TAB>count` triples per count
    /// table (zeros omitted). Row totals are rebuilt on load.
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = String::from("HMMLDA v1\n");
        let _ = writeln!(out, "topics {}", c.num_topics);
        let _ = writeln!(out, "classes {}", c.num_classes);
        let _ = writeln!(out, "vocab {}", self.vocab_size);
        let _ = writeln!(out, "docs {}", self.num_docs);
        let _ = writeln!(out, "alpha_t {}", c.alpha);
        let _ = writeln!(out, "beta_t {}", c.beta);
        let _ = writeln!(out, "delta_c {}", c.delta);
        let _ = writeln!(out, "gamma_c {}", c.gamma);
        let _ = writeln!(out, "burn_in {}", c.burn_in);
        let _ = writeln!(out, "seed {}", c.seed);
        let _ = writeln!(out, "average_last {}", c.average_last);
        let k = c.num_topics;
        let v = self.vocab_size;
        let t = c.num_classes + 1;
        for (name, table, cols) in [
            ("doc_topic", &self.doc_topic, k),
            ("topic_word", &self.topic_word, v),
            ("class_word", &self.class_word, v),
            ("transitions", &self.trans, t),
        ] {
            let nnz = table.iter().filter(|&&x| x > 0).count();
            let _ = writeln!(out, "section {name} {nnz}");
            for (i, &x) in table.iter().enumerate() {
                if x > 0 {
                    let _ = writeln!(out, "{}\t{}\t{}", i / cols, i % cols, x);
                }
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, "HMMLDA v1")) => {}
            _ => return Err(Error::parse(1, "expected `HMMLDA v1`")),
        }
        let mut config = HmmLdaConfig::default();
        let mut vocab_size = 0;
        let mut num_docs = 0;
        let mut header_done = false;
        let mut model: Option<HmmLdaModel> = None;
        let mut pending = None;
        while let Some((ln, line)) = pending.take().or_else(|| lines.next()) {
            let mut f = line.split_whitespace();
            let key = f.next().unwrap_or("");
            let val = f.next().unwrap_or("");
            if !header_done && key != "section" {
                let bad = |e: std::num::ParseIntError| Error::parse(ln, format!("{key}: {e}"));
                let badf = |e: std::num::ParseFloatError| Error::parse(ln, format!("{key}: {e}"));
                match key {
                    "topics" => config.num_topics = val.parse().map_err(bad)?,
                    "classes" => config.num_classes = val.parse().map_err(bad)?,
                    "vocab" => vocab_size = val.parse().map_err(bad)?,
                    "docs" => num_docs = val.parse().map_err(bad)?,
                    "alpha_t" => config.alpha = val.parse().map_err(badf)?,
                    "beta_t" => config.beta = val.parse().map_err(badf)?,
                    "delta_c" => config.delta = val.parse().map_err(badf)?,
                    "gamma_c" => config.gamma = val.parse().map_err(badf)?,
                    "burn_in" => config.burn_in = val.parse().map_err(bad)?,
                    "seed" => config.seed = val.parse().map_err(bad)?,
                    "average_last" => config.average_last = val.parse().map_err(bad)?,
                    _ => return Err(Error::parse(ln, format!("unknown header key {key:?}"))),
                }
                continue;
            }
            if !header_done {
                config.validate_sampler().map_err(|e| Error::parse(ln, e.to_string()))?;
                header_done = true;
                model = Some(HmmLdaModel::zeros(&config, vocab_size, num_docs));
            }
            match key {
                "end" => break,
                "section" => {
                    let m = model.as_mut().expect("model allocated");
                    let cols_rows = |name: &str| match name {
                        "doc_topic" => Some((m.config.num_topics, m.num_docs)),
                        "topic_word" => Some((m.vocab_size, m.config.num_topics)),
                        "class_word" => Some((m.vocab_size, m.config.num_classes)),
                        "transitions" => Some((m.config.num_classes + 1, m.config.num_classes + 1)),
                        _ => None,
                    };
                    let (cols, rows) = cols_rows(val)
                        .ok_or_else(|| Error::parse(ln, format!("unknown section {val:?}")))?;
                    let name = val.to_owned();
                    for (ln, line) in lines.by_ref() {
                        if line.starts_with("section") || line == "end" {
                            pending = Some((ln, line));
                            break;
                        }
                        let parts: Vec<&str> = line.split('\t').collect();
                        let nums: Vec<usize> = parts
                            .iter()
                            .map(|p| p.parse::<usize>())
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|_| Error::parse(ln, "expected row<TAB>col<TAB>count"))?;
                        let [r, c, n] = nums[..] else {
                            return Err(Error::parse(ln, "expected row<TAB>col<TAB>count"));
                        };
                        if r >= rows || c >= cols {
                            return Err(Error::parse(ln, "index out of range"));
                        }
                        let table = match name.as_str() {
                            "doc_topic" => &mut m.doc_topic,
                            "topic_word" => &mut m.topic_word,
                            "class_word" => &mut m.class_word,
                            _ => &mut m.trans,
                        };
                        table[r * cols + c] = n as u32;
                    }
                }
                _ => return Err(Error::parse(ln, format!("unexpected line {line:?}"))),
            }
        }
        let mut m = model.ok_or_else(|| Error::parse(1, "no sections"))?;
        m.rebuild_totals();
        Ok(m)
    }

    fn rebuild_totals(&mut self) {
        let v = self.vocab_size;
        let t = self.config.num_classes + 1;
        self.topic_total = self.topic_word.chunks(v.max(1)).map(|r| r.iter().sum()).collect();
        self.class_total = self.class_word.chunks(v.max(1)).map(|r| r.iter().sum()).collect();
        self.trans_out = self.trans.chunks(t).map(|r| r.iter().sum()).collect();
        self.topic_total.resize(self.config.num_topics, 0);
        self.class_total.resize(self.config.num_classes, 0);
    }
}

fn dirichlet_multinomial(counts: &[u32], a: f64) -> f64 {
    let n: u32 = counts.iter().sum();
    let k = counts.len() as f64;
    let cells: f64 = counts.iter().filter(|&&x| x > 0).map(|&x| ln_gamma(x as f64 + a) - ln_gamma(a)).sum();
    ln_gamma(k * a) - ln_gamma(k * a + n as f64) + cells
}
