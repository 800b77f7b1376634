use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Candidate;
use crate::corpus::Vocabulary;

/// One decoded input, serialized as a line of JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeRecord {
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    pub candidates: Vec<CandidateRecord>,
    /// False when no hypothesis reached EOS.
    #[serde(default = "yes")]
    pub complete: bool,
}

fn yes() -> bool {
    true
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub tokens: Vec<String>,
    #[serde(with = "float")]
    pub loglik: f64,
    /// Topic-word bias collected along the way.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub bias: f64,
    #[serde(with = "float")]
    pub topic_score: f64,
    #[serde(with = "float")]
    pub semantic_score: f64,
    #[serde(default, with = "opt_float", skip_serializing_if = "Option::is_none")]
    pub reverse_score: Option<f64>,
    #[serde(with = "float")]
    pub total: f64,
}

impl CandidateRecord {
    pub fn new(c: &Candidate, vocab: &Vocabulary) -> Self {
        Self {
            tokens: vocab.decode(&c.tokens),
            loglik: c.loglik,
            bias: c.bias,
            topic_score: c.topic_score,
            semantic_score: c.semantic_score,
            reverse_score: c.reverse_score,
            total: c.total,
        }
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    /// Inverse of [`CandidateRecord::new`]; `forward` is reset to the total.
    pub fn to_candidate(&self, vocab: &Vocabulary, finished: bool) -> Candidate {
        Candidate {
            tokens: vocab.encode(&self.tokens),
            loglik: self.loglik,
            bias: self.bias,
            topic_score: self.topic_score,
            semantic_score: self.semantic_score,
            forward: self.total,
            reverse_score: self.reverse_score,
            total: self.total,
            finished,
        }
    }
}

impl DecodeRecord {
    pub fn new(source: &[String], reference: Option<&[String]>, candidates: &[Candidate], complete: bool, vocab: &Vocabulary) -> Self {
        Self {
            source: source.join(" "),
            reference: reference.map(|r| r.join(" ")),
            candidates: candidates.iter().map(|c| CandidateRecord::new(c, vocab)).collect(),
            complete,
        }
    }

    /// Tokens of the top candidate (empty if there is none).
    pub fn best(&self) -> Vec<String> {
        self.candidates.first().map(|c| c.tokens.clone()).unwrap_or_default()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Num {
    Finite(f64),
    Special(String),
}

fn encode(x: f64) -> Num {
    if x.is_finite() {
        Num::Finite(x)
    } else if x.is_nan() {
        Num::Special("nan".into())
    } else if x > 0.0 {
        Num::Special("inf".into())
    } else {
        Num::Special("-inf".into())
    }
}

fn decode<E: serde::de::Error>(n: Num) -> Result<f64, E> {
    match n {
        Num::Finite(x) => Ok(x),
        Num::Special(s) => match s.as_str() {
            "nan" => Ok(f64::NAN),
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            _ => Err(E::custom(format!("not a number: {s:?}"))),
        },
    }
}

/// Non-finite floats travel as the strings `inf`, `-inf` and `nan`.
mod float {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        encode(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        decode(Num::deserialize(d)?)
    }
}

mod opt_float {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        x.map(encode).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<Num>::deserialize(d)?.map(decode).transpose()
    }
}
