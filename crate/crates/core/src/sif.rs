//! Smooth-inverse-frequency sentence embeddings.
//!
//! A sentence embeds as the `a / (a + P(w))`-weighted average of its word
//! vectors, minus its projection on the corpus's first principal direction
//! `u`. Similarity is the plain dot product.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Vocabulary;
use crate::util::dot;
use crate::{Error, Result};

pub const DEFAULT_A: f64 = 1e-3;
const POWER_TOL: f64 = 1e-8;
const POWER_MAX_ITERS: usize = 1000;

/// Word → vector table with a fixed dimension.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WordVectors {
    dim: usize,
    words: Vec<String>,
    table: HashMap<String, Vec<f64>>,
}

impl WordVectors {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            ..Default::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn insert(&mut self, word: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: vector.len(),
            });
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::Degenerate("non-finite vector entry".into()));
        }
        let word = word.into();
        if self.table.insert(word.clone(), vector).is_none() {
            self.words.push(word);
        }
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.table.get(word).map(Vec::as_slice)
    }

    /// Random unit vectors for `words`, reproducible from `seed`.
    pub fn random<S: AsRef<str>>(words: &[S], dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut wv = Self::new(dim);
        for w in words {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = dot(&v, &v).sqrt().max(f64::MIN_POSITIVE);
            v.iter_mut().for_each(|x| *x /= norm);
            wv.insert(w.as_ref(), v).expect("dimension and values are valid");
        }
        wv
    }

    /// Text format: `word f1 ... fd` per line. A leading `<count> <dim>`
    /// line (word2vec style) is accepted and skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut wv: Option<Self> = None;
        for (i, line) in text.lines().enumerate() {
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let values: Vec<&str> = fields.collect();
            if i == 0 && values.len() == 1 && word.parse::<usize>().is_ok() && values[0].parse::<usize>().is_ok() {
                continue;
            }
            let vector: Vec<f64> = values
                .iter()
                .map(|v| v.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(i + 1, "bad float"))?;
            let wv = wv.get_or_insert_with(|| Self::new(vector.len()));
            wv.insert(word, vector).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        }
        wv.filter(|w| w.dim > 0).ok_or(Error::Empty("word vector file"))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for w in &self.words {
            out.push_str(w);
            for x in &self.table[w] {
                let _ = write!(out, " {x}");
            }
            out.push('\n');
        }
        out
    }

    /// Vectors indexed by vocabulary id; `None` where the word has no vector.
    /// Reserved ids never get one.
    pub fn align(&self, vocab: &Vocabulary) -> Vec<Option<Vec<f64>>> {
        (0..vocab.len())
            .map(|id| {
                if Vocabulary::is_reserved(id) {
                    None
                } else {
                    self.get(vocab.token(id)).map(<[f64]>::to_vec)
                }
            })
            .collect()
    }
}

/// Fitted SIF embedder over vocabulary ids.
#[derive(Debug, Clone, PartialEq)]
pub struct SifModel {
    dim: usize,
    a: f64,
    vectors: Vec<Option<Vec<f64>>>,
    unigram: Vec<f64>,
    component: Vec<f64>,
}

impl SifModel {
    /// Fits the principal direction on `sentences` (word ids).
    ///
    /// Sentences without an in-vocabulary word are ignored; at least two
    /// must remain.
    pub fn fit(
        dim: usize,
        vectors: Vec<Option<Vec<f64>>>,
        unigram: Vec<f64>,
        sentences: &[Vec<usize>],
        a: f64,
    ) -> Result<Self> {
        let mut model = Self::with_component(dim, vectors, unigram, a, None)?;
        let mut gram = vec![0.0; dim * dim];
        let mut used = 0;
        for s in sentences {
            let (raw, n_inv) = model.raw_embedding(s);
            if n_inv == 0 {
                continue;
            }
            used += 1;
            for i in 0..dim {
                if raw[i] == 0.0 {
                    continue;
                }
                for j in 0..dim {
                    gram[i * dim + j] += raw[i] * raw[j];
                }
            }
        }
        if used < 2 {
            return Err(Error::Degenerate(format!(
                "need at least 2 sentences with in-vocabulary words, got {used}"
            )));
        }
        model.component = dominant_eigenvector(&gram, dim)?;
        Ok(model)
    }

    /// Model with a known principal direction (normalized here). `None`
    /// leaves the zero vector, i.e. no removal.
    pub fn with_component(
        dim: usize,
        vectors: Vec<Option<Vec<f64>>>,
        unigram: Vec<f64>,
        a: f64,
        component: Option<Vec<f64>>,
    ) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidConfig("SIF weight a must be positive".into()));
        }
        if vectors.len() != unigram.len() {
            return Err(Error::DimensionMismatch {
                expected: vectors.len(),
                got: unigram.len(),
            });
        }
        for v in vectors.iter().flatten() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
            }
        }
        let component = match component {
            Some(u) => {
                if u.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: u.len() });
                }
                let norm = dot(&u, &u).sqrt();
                if !(norm > 0.0) {
                    return Err(Error::Degenerate("zero principal component".into()));
                }
                u.iter().map(|x| x / norm).collect()
            }
            None => vec![0.0; dim],
        };
        Ok(Self {
            dim,
            a,
            vectors,
            unigram,
            component,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// First principal direction `u`, unit length with a positive leading
    /// coordinate.
    pub fn component(&self) -> &[f64] {
        &self.component
    }

    /// `a / (a + P(w))`.
    pub fn weight(&self, word: usize) -> f64 {
        let p = self.unigram.get(word).copied().unwrap_or(0.0);
        self.a / (self.a + p)
    }

    pub fn vector(&self, word: usize) -> Option<&[f64]> {
        self.vectors.get(word).and_then(|v| v.as_deref())
    }

    pub fn in_vocab(&self, word: usize) -> bool {
        self.vector(word).is_some()
    }

    /// Weighted average before component removal, with the number of
    /// in-vocabulary tokens it averages over.
    pub fn raw_embedding(&self, sentence: &[usize]) -> (Vec<f64>, usize) {
        let mut sum = vec![0.0; self.dim];
        let mut n = 0;
        for &w in sentence {
            if let Some(v) = self.vector(w) {
                let weight = self.weight(w);
                sum.iter_mut().zip(v).for_each(|(s, x)| *s += weight * x);
                n += 1;
            }
        }
        let scale = 1.0 / n.max(1) as f64;
        sum.iter_mut().for_each(|s| *s *= scale);
        (sum, n)
    }

    /// `v - u (u·v)`.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let along = dot(&self.component, v);
        v.iter().zip(&self.component).map(|(x, u)| x - u * along).collect()
    }

    /// SIF embedding; the zero vector when no token has a vector.
    pub fn embed(&self, sentence: &[usize]) -> Vec<f64> {
        self.project(&self.raw_embedding(sentence).0)
    }

    /// `SIF v1` header with `a`, `d`, the vector file reference and `u`.
    pub fn to_text(&self, vectors_ref: &str) -> String {
        let mut out = format!("SIF v1\na {}\nd {}\nvectors {}\nu", self.a, self.dim, vectors_ref);
        for x in &self.component {
            let _ = write!(out, " {x}");
        }
        out.push('\n');
        out
    }
}

/// Header fields of a saved SIF model.
#[derive(Debug, Clone, PartialEq)]
pub struct SifHeader {
    pub a: f64,
    pub dim: usize,
    pub vectors: String,
    pub component: Vec<f64>,
}

impl SifHeader {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some("SIF v1") {
            return Err(Error::parse(1, "expected `SIF v1`"));
        }
        let mut a = None;
        let mut dim = None;
        let mut vectors = None;
        let mut component = None;
        for (i, line) in lines.enumerate() {
            let ln = i + 2;
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            match key {
                "a" => a = Some(rest.parse().map_err(|_| Error::parse(ln, "bad a"))?),
                "d" => dim = Some(rest.parse().map_err(|_| Error::parse(ln, "bad d"))?),
                "vectors" => vectors = Some(rest.to_owned()),
                "u" => {
                    component = Some(
                        rest.split_whitespace()
                            .map(str::parse)
                            .collect::<std::result::Result<Vec<f64>, _>>()
                            .map_err(|_| Error::parse(ln, "bad u"))?,
                    )
                }
                "" => {}
                _ => return Err(Error::parse(ln, format!("unknown key {key:?}"))),
            }
        }
        let missing = |k: &str| Error::parse(1, format!("missing {k}"));
        let header = Self {
            a: a.ok_or_else(|| missing("a"))?,
            dim: dim.ok_or_else(|| missing("d"))?,
            vectors: vectors.ok_or_else(|| missing("vectors"))?,
            component: component.ok_or_else(|| missing("u"))?,
        };
        if header.component.len() != header.dim {
            return Err(Error::DimensionMismatch {
                expected: header.dim,
                got: header.component.len(),
            });
        }
        Ok(header)
    }
}

/// Dot product.
pub fn similarity(v1: &[f64], v2: &[f64]) -> Result<f64> {
    if v1.len() != v2.len() {
        return Err(Error::DimensionMismatch {
            expected: v1.len(),
            got: v2.len(),
        });
    }
    Ok(dot(v1, v2))
}

/// Power iteration on a symmetric PSD `dim × dim` matrix.
fn dominant_eigenvector(gram: &[f64], dim: usize) -> Result<Vec<f64>> {
    let col_norm = |j: usize| (0..dim).map(|i| gram[i * dim + j].powi(2)).sum::<f64>();
    let start = (0..dim)
        .max_by(|&a, &b| col_norm(a).total_cmp(&col_norm(b)))
        .filter(|&j| col_norm(j) > 0.0)
        .ok_or_else(|| Error::Degenerate("all-zero embedding matrix".into()))?;
    let mut x: Vec<f64> = (0..dim).map(|i| gram[i * dim + start]).collect();
    normalize(&mut x);
    let mut next = vec![0.0; dim];
    for _ in 0..POWER_MAX_ITERS {
        for i in 0..dim {
            next[i] = dot(&gram[i * dim..(i + 1) * dim], &x);
        }
        normalize(&mut next);
        let diff: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        std::mem::swap(&mut x, &mut next);
        if diff < POWER_TOL {
            break;
        }
    }
    if let Some(lead) = x.iter().find(|v| v.abs() > 1e-12) {
        if *lead < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
    Ok(x)
}

fn normalize(x: &mut [f64]) {
    let n = dot(x, x).sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}
