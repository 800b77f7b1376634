use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::DialoguePair;
use crate::{Error, Result};

/// Inclusive source-length range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketRange {
    pub name: String,
    pub min_len: usize,
    pub max_len: usize,
}

/// Sorted, non-overlapping source-length ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketSpec {
    ranges: Vec<BucketRange>,
}

impl Default for BucketSpec {
    /// `b1` 3–6, `b2` 7–15, `b3` 16–25 source words.
    fn default() -> Self {
        Self::new(vec![
            ("b1", 3, 6),
            ("b2", 7, 15),
            ("b3", 16, 25),
        ])
        .expect("default buckets are valid")
    }
}

impl BucketSpec {
    pub fn new<S: Into<String>>(ranges: Vec<(S, usize, usize)>) -> Result<Self> {
        let ranges: Vec<BucketRange> = ranges
            .into_iter()
            .map(|(name, min_len, max_len)| BucketRange {
                name: name.into(),
                min_len,
                max_len,
            })
            .collect();
        for r in &ranges {
            if r.min_len > r.max_len {
                return Err(Error::InvalidConfig(format!("bucket {} has min > max", r.name)));
            }
        }
        for w in ranges.windows(2) {
            if w[1].min_len <= w[0].max_len {
                return Err(Error::InvalidConfig(format!(
                    "buckets {} and {} overlap or are unsorted",
                    w[0].name, w[1].name
                )));
            }
        }
        Ok(Self { ranges })
    }

    pub fn ranges(&self) -> &[BucketRange] {
        &self.ranges
    }

    /// Index of the range holding `len`, if any.
    pub fn locate(&self, len: usize) -> Option<usize> {
        self.ranges
            .iter()
            .position(|r| (r.min_len..=r.max_len).contains(&len))
    }
}

/// Pairs sampled for one bucket.
#[derive(Debug, Clone, PartialEq)]
pub struct Bucket {
    pub name: String,
    /// Number of pairs whose source length fell in the range.
    pub eligible: usize,
    pub pairs: Vec<DialoguePair>,
}

/// Assigns each pair to its source-length bucket and samples at most
/// `per_bucket` of them uniformly without replacement.
///
/// Pairs outside every range are dropped. Sampled pairs keep corpus order.
/// The sample depends only on `seed` and the input.
pub fn bucket_split(
    pairs: &[DialoguePair],
    spec: &BucketSpec,
    per_bucket: usize,
    seed: u64,
) -> Vec<Bucket> {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); spec.ranges.len()];
    for (i, p) in pairs.iter().enumerate() {
        if let Some(b) = spec.locate(p.source.len()) {
            members[b].push(i);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    spec.ranges
        .iter()
        .zip(members)
        .map(|(range, idx)| {
            if idx.is_empty() {
                log::warn!("bucket {} has no eligible pairs", range.name);
            }
            let k = per_bucket.min(idx.len());
            let mut chosen: Vec<usize> = sample(&mut rng, idx.len(), k).into_iter().collect();
            chosen.sort_unstable();
            Bucket {
                name: range.name.clone(),
                eligible: idx.len(),
                pairs: chosen.into_iter().map(|j| pairs[idx[j]].clone()).collect(),
            }
        })
        .collect()
}
