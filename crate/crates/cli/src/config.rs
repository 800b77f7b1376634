use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use dcgen_core::decoder::DecoderConfig;
use dcgen_core::sif::DEFAULT_A;
use dcgen_core::topic_syntax::HmmLdaConfig;
use serde::{Deserialize, Serialize};

/// Everything a pipeline run depends on. Stored as TOML; relative paths
/// resolve against the working directory.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub corpus: CorpusConfig,
    pub hmmlda: HmmLdaConfig,
    pub sif: SifConfig,
    pub lm: LmConfig,
    pub decoder: DecoderConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Training pairs, `source<TAB>target` per line.
    pub pairs: Option<PathBuf>,
    /// One stop word per line; the built-in list when absent.
    pub stopwords: Option<PathBuf>,
    /// `word f1 ... fd` per line; random vectors when absent.
    pub vectors: Option<PathBuf>,
    pub model_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            pairs: None,
            stopwords: None,
            vectors: None,
            model_dir: PathBuf::from("model"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    /// Run text through the tokenizer instead of splitting on whitespace.
    pub raw: bool,
    /// Rarer words map to the unknown-word token.
    pub min_count: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self { raw: false, min_count: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SifConfig {
    pub a: f64,
    /// Dimension of the random vectors used without a vector file.
    pub random_dim: usize,
    pub seed: u64,
}

impl Default for SifConfig {
    fn default() -> Self {
        Self {
            a: DEFAULT_A,
            random_dim: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmConfig {
    pub order: usize,
    pub discount: f64,
    /// Weight of the n-gram model in the mixture with the lexical channel.
    pub lambda: f64,
    pub ibm_iterations: usize,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            order: 3,
            discount: 0.75,
            lambda: 0.6,
            ibm_iterations: 10,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("{}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("{}: bad config", path.display()))
    }
}
