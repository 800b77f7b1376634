//! Model files in a run directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use dcgen_core::corpus::{parse_pairs, DialoguePair, StopList, Vocabulary};
use dcgen_core::langmodel::{LexicalTable, MixtureLm, NGramModel};
use dcgen_core::sif::{SifHeader, SifModel, WordVectors};
use dcgen_core::topic_syntax::{HmmLdaModel, WordTopicStats};

use crate::config::RunConfig;
use crate::Usage;

pub const VOCAB: &str = "vocab.txt";
pub const HMMLDA: &str = "hmmlda.txt";
pub const WORD_TOPICS: &str = "word_topics.txt";
pub const VECTORS: &str = "vectors.txt";
pub const SIF: &str = "sif.txt";
pub const FORWARD_NGRAM: &str = "forward.ngram";
pub const FORWARD_IBM1: &str = "forward.ibm1";
pub const REVERSE_NGRAM: &str = "reverse.ngram";
pub const REVERSE_IBM1: &str = "reverse.ibm1";

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Fails on an existing file unless `force` is set.
pub fn check_writable(path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        return Err(Usage(format!("{} exists; pass --force to overwrite", path.display())).into());
    }
    Ok(())
}

pub fn write(path: &Path, text: &str, force: bool) -> Result<()> {
    check_writable(path, force)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

pub fn require(path: Option<&PathBuf>, what: &str) -> Result<PathBuf> {
    let path = path.ok_or_else(|| Usage(format!("no {what} given")))?;
    if !path.exists() {
        anyhow::bail!("{}: no such file", path.display());
    }
    Ok(path.clone())
}

pub fn load_pairs(path: &Path, raw: bool) -> Result<Vec<DialoguePair>> {
    let pairs = parse_pairs(&read(path)?, raw).with_context(|| format!("{}", path.display()))?;
    if pairs.is_empty() {
        anyhow::bail!("{}: no pairs", path.display());
    }
    Ok(pairs)
}

pub fn stop_list(cfg: &RunConfig) -> Result<StopList> {
    match &cfg.paths.stopwords {
        Some(p) => Ok(StopList::parse(&read(p)?)),
        None => Ok(StopList::default()),
    }
}

/// The run directory's vocabulary, built from `pairs` and saved on first use.
pub fn vocabulary(dir: &Path, pairs: &[DialoguePair], min_count: u64) -> Result<Vocabulary> {
    let path = dir.join(VOCAB);
    if path.exists() {
        return load_vocab(dir);
    }
    let vocab = Vocabulary::build(pairs, min_count)?;
    write(&path, &vocab.to_text(), false)?;
    Ok(vocab)
}

pub fn load_vocab(dir: &Path) -> Result<Vocabulary> {
    let path = dir.join(VOCAB);
    Vocabulary::from_text(&read(&path)?).with_context(|| format!("{}", path.display()))
}

/// Topic statistics, SIF model and the raw HMM-LDA counts.
pub struct Constraints {
    pub hmm: HmmLdaModel,
    pub stats: WordTopicStats,
    pub sif: SifModel,
}

/// Everything decoding needs. The constraint models are absent when the
/// run directory has none and unconstrained decoding was requested.
pub struct Models {
    pub vocab: Vocabulary,
    pub forward: MixtureLm,
    pub reverse: MixtureLm,
    pub constraints: Option<Constraints>,
}

impl Models {
    pub fn load(cfg: &RunConfig, constrained: bool) -> Result<Self> {
        let dir = &cfg.paths.model_dir;
        if !dir.is_dir() {
            anyhow::bail!("{}: no such model directory", dir.display());
        }
        let vocab = load_vocab(dir)?;
        let lm = |ngram: &str, ibm: &str| -> Result<MixtureLm> {
            let np = dir.join(ngram);
            let ip = dir.join(ibm);
            let ng = NGramModel::from_text(&read(&np)?, &vocab).with_context(|| format!("{}", np.display()))?;
            let ch = LexicalTable::from_text(&read(&ip)?, &vocab).with_context(|| format!("{}", ip.display()))?;
            Ok(MixtureLm::new(ng, ch, cfg.lm.lambda)?)
        };
        let forward = lm(FORWARD_NGRAM, FORWARD_IBM1)?;
        let reverse = lm(REVERSE_NGRAM, REVERSE_IBM1)?;
        let constraints = if constrained { Some(load_constraints(dir, &vocab)?) } else { None };
        Ok(Self {
            vocab,
            forward,
            reverse,
            constraints,
        })
    }
}

fn load_constraints(dir: &Path, vocab: &Vocabulary) -> Result<Constraints> {
    let hp = dir.join(HMMLDA);
    let hmm = HmmLdaModel::from_text(&read(&hp)?).with_context(|| format!("{}", hp.display()))?;
    let wp = dir.join(WORD_TOPICS);
    let stats = WordTopicStats::from_text(&read(&wp)?, vocab).with_context(|| format!("{}", wp.display()))?;
    Ok(Constraints {
        hmm,
        stats,
        sif: load_sif(dir, vocab)?,
    })
}

pub fn load_sif(dir: &Path, vocab: &Vocabulary) -> Result<SifModel> {
    let sp = dir.join(SIF);
    let header = SifHeader::parse(&read(&sp)?).with_context(|| format!("{}", sp.display()))?;
    let vp = dir.join(&header.vectors);
    let vectors = WordVectors::parse(&read(&vp)?).with_context(|| format!("{}", vp.display()))?;
    if vectors.dim() != header.dim {
        anyhow::bail!("{}: vectors have dimension {}, expected {}", vp.display(), vectors.dim(), header.dim);
    }
    let unigram = (0..vocab.len()).map(|i| vocab.unigram(i)).collect();
    Ok(SifModel::with_component(header.dim, vectors.align(vocab), unigram, header.a, Some(header.component))?)
}
