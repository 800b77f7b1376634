use anyhow::Result;
use dcgen_core::corpus::{DialoguePair, Vocabulary};
use dcgen_core::langmodel::{train_ibm1, train_ngram};
use dcgen_core::sif::{SifModel, WordVectors};
use dcgen_core::topic_syntax::{self, conversation_documents};

use crate::artifacts::{self, *};
use crate::config::RunConfig;

fn corpus(cfg: &RunConfig) -> Result<(Vec<DialoguePair>, Vocabulary)> {
    let path = artifacts::require(cfg.paths.pairs.as_ref(), "pairs file (--pairs)")?;
    let pairs = artifacts::load_pairs(&path, cfg.corpus.raw)?;
    let vocab = artifacts::vocabulary(&cfg.paths.model_dir, &pairs, cfg.corpus.min_count)?;
    log::info!("{} pairs, {} vocabulary entries", pairs.len(), vocab.len());
    Ok((pairs, vocab))
}

fn check_outputs(cfg: &RunConfig, names: &[&str], force: bool) -> Result<()> {
    for name in names {
        artifacts::check_writable(&cfg.paths.model_dir.join(name), force)?;
    }
    Ok(())
}

pub fn hmmlda(cfg: &RunConfig, force: bool) -> Result<()> {
    check_outputs(cfg, &[HMMLDA, WORD_TOPICS], force)?;
    cfg.hmmlda.validate()?;
    let (pairs, vocab) = corpus(cfg)?;
    let docs = conversation_documents(&pairs, &vocab);
    log::info!("{} conversation documents", docs.len());
    let (state, stats) = topic_syntax::train(&cfg.hmmlda, &docs, vocab.len())?;
    let dir = &cfg.paths.model_dir;
    artifacts::write(&dir.join(HMMLDA), &state.model().to_text(), force)?;
    artifacts::write(&dir.join(WORD_TOPICS), &stats.to_text(&vocab), force)
}

pub fn sif(cfg: &RunConfig, force: bool) -> Result<()> {
    check_outputs(cfg, &[VECTORS, SIF], force)?;
    let external = match &cfg.paths.vectors {
        Some(p) => Some(WordVectors::parse(&artifacts::read(p)?).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))?),
        None => None,
    };
    let (pairs, vocab) = corpus(cfg)?;
    let words: Vec<&str> = (0..vocab.len())
        .filter(|&i| !Vocabulary::is_reserved(i))
        .map(|i| vocab.token(i))
        .collect();
    let vectors = match external {
        Some(all) => {
            let mut kept = WordVectors::new(all.dim());
            for w in &words {
                if let Some(v) = all.get(w) {
                    kept.insert(*w, v.to_vec())?;
                }
            }
            log::info!("{} of {} words have vectors", kept.len(), words.len());
            kept
        }
        None => WordVectors::random(&words, cfg.sif.random_dim, cfg.sif.seed),
    };
    let unigram = (0..vocab.len()).map(|i| vocab.unigram(i)).collect();
    let sentences: Vec<Vec<usize>> = conversation_documents(&pairs, &vocab).into_iter().flatten().collect();
    let model = SifModel::fit(vectors.dim(), vectors.align(&vocab), unigram, &sentences, cfg.sif.a)?;
    let dir = &cfg.paths.model_dir;
    artifacts::write(&dir.join(VECTORS), &vectors.to_text(), force)?;
    artifacts::write(&dir.join(SIF), &model.to_text(VECTORS), force)
}

pub fn lm(cfg: &RunConfig, force: bool) -> Result<()> {
    check_outputs(cfg, &[FORWARD_NGRAM, FORWARD_IBM1, REVERSE_NGRAM, REVERSE_IBM1], force)?;
    let (pairs, vocab) = corpus(cfg)?;
    let forward: Vec<(Vec<usize>, Vec<usize>)> =
        pairs.iter().map(|p| (vocab.encode(&p.source), vocab.encode(&p.target))).collect();
    let reverse: Vec<(Vec<usize>, Vec<usize>)> = forward.iter().map(|(s, t)| (t.clone(), s.clone())).collect();
    let dir = &cfg.paths.model_dir;
    for (data, ngram_file, ibm_file) in [(&forward, FORWARD_NGRAM, FORWARD_IBM1), (&reverse, REVERSE_NGRAM, REVERSE_IBM1)] {
        let targets: Vec<Vec<usize>> = data.iter().map(|d| d.1.clone()).collect();
        let ngram = train_ngram(&targets, cfg.lm.order, cfg.lm.discount, vocab.len())?;
        let table = train_ibm1(data, cfg.lm.ibm_iterations)?;
        artifacts::write(&dir.join(ngram_file), &ngram.to_text(&vocab), force)?;
        artifacts::write(&dir.join(ibm_file), &table.to_text(&vocab), force)?;
    }
    Ok(())
}
