use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;

use anyhow::{Context, Result};
use dcgen_core::corpus::{bucket_split, tokenize, BucketSpec, StopList};
use dcgen_core::decoder::{
    beam_search, diagnose_split, mmi_rerank, ta_bias_words, topic_word_list, DecodeRecord, DecoderConfig,
    SourceContext,
};
use dcgen_core::metrics::{report_table, MetricsReport};
use rayon::prelude::*;

use crate::artifacts::{self, Models};
use crate::config::RunConfig;
use crate::Usage;

/// A source utterance with an optional reference response.
#[derive(Debug, Clone)]
pub struct Prompt {
    pub source: Vec<String>,
    pub reference: Option<Vec<String>>,
}

pub enum PromptSource<'a> {
    Pairs { path: &'a Path, bucket_sample: Option<usize>, seed: u64 },
    Lines(&'a Path),
}

pub fn load_prompts(src: PromptSource, raw: bool) -> Result<Vec<Prompt>> {
    let prompts: Vec<Prompt> = match src {
        PromptSource::Pairs { path, bucket_sample, seed } => {
            let mut pairs = artifacts::load_pairs(path, raw)?;
            if let Some(n) = bucket_sample {
                pairs = bucket_split(&pairs, &BucketSpec::default(), n, seed)
                    .into_iter()
                    .flat_map(|b| b.pairs)
                    .collect();
            }
            pairs
                .into_iter()
                .map(|p| Prompt { source: p.source, reference: Some(p.target) })
                .collect()
        }
        PromptSource::Lines(path) => artifacts::read(path)?
            .lines()
            .map(|l| split(l, raw))
            .filter(|s| !s.is_empty())
            .map(|source| Prompt { source, reference: None })
            .collect(),
    };
    if prompts.is_empty() {
        anyhow::bail!("no prompts to decode");
    }
    Ok(prompts)
}

fn split(line: &str, raw: bool) -> Vec<String> {
    if raw {
        tokenize(line)
    } else {
        line.split_whitespace().map(str::to_owned).collect()
    }
}

/// Beam search then MMI reranking of one prompt. `vanilla` ignores the
/// constraint models and the topic-word bias.
pub fn decode_one(models: &Models, cfg: &DecoderConfig, prompt: &Prompt, vanilla: bool) -> Result<DecodeRecord> {
    let vocab = &models.vocab;
    let src = vocab.encode(&prompt.source);
    let ctx = match (&models.constraints, vanilla) {
        (Some(c), false) => {
            let ctx = SourceContext::new(&src, &c.stats, &c.sif, vocab.len());
            match (cfg.ta_bias, ctx.source_topics()) {
                (Some(ta), Some(topics)) => {
                    let words = ta_bias_words(&c.hmm, topics, ta.n_words)?;
                    ctx.with_bias(words, ta.bias)
                }
                _ => ctx,
            }
        }
        _ => SourceContext::unconstrained(&src),
    };
    let out = beam_search(&models.forward, &ctx, cfg)?;
    let ranked = mmi_rerank(out.candidates, &models.reverse, &src, cfg)?;
    Ok(DecodeRecord::new(&prompt.source, prompt.reference.as_deref(), &ranked, out.complete, vocab))
}

/// Decodes on `jobs` threads; records keep the order of `prompts`.
pub fn decode_all(models: &Models, cfg: &DecoderConfig, prompts: &[Prompt], vanilla: bool, jobs: usize) -> Result<Vec<DecodeRecord>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    pool.install(|| {
        prompts
            .par_iter()
            .map(|p| decode_one(models, cfg, p, vanilla).with_context(|| format!("decoding {:?}", p.source.join(" "))))
            .collect()
    })
}

pub fn to_jsonl(records: &[DecodeRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn parse_jsonl(path: &Path) -> Result<Vec<DecodeRecord>> {
    let text = artifacts::read(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{}:{}: bad record", path.display(), i + 1)))
        .collect()
}

/// Writes to `output`, or standard output when absent.
pub fn emit(output: Option<&Path>, text: &str, force: bool) -> Result<()> {
    match output {
        Some(p) => artifacts::write(p, text, force),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

/// Re-scores stored candidates with the reverse model and re-sorts them
/// under the configured weights.
pub fn rerank(models: &Models, cfg: &DecoderConfig, records: Vec<DecodeRecord>) -> Result<Vec<DecodeRecord>> {
    cfg.validate()?;
    let vocab = &models.vocab;
    records
        .into_iter()
        .map(|r| {
            if r.candidates.is_empty() {
                return Ok(r);
            }
            let source: Vec<String> = r.source.split_whitespace().map(str::to_owned).collect();
            let cands = r.candidates.iter().map(|c| c.to_candidate(vocab, r.complete)).collect();
            let ranked = mmi_rerank(cands, &models.reverse, &vocab.encode(&source), cfg)?;
            let reference: Option<Vec<String>> =
                r.reference.as_ref().map(|t| t.split_whitespace().map(str::to_owned).collect());
            Ok(DecodeRecord::new(&source, reference.as_deref(), &ranked, r.complete, vocab))
        })
        .collect()
}

pub fn metrics(records: &[DecodeRecord], stop: &StopList) -> Result<MetricsReport> {
    let responses: Vec<Vec<String>> = records.iter().map(DecodeRecord::best).collect();
    let references: Option<Vec<Vec<String>>> = records
        .iter()
        .map(|r| r.reference.as_ref().map(|t| t.split_whitespace().map(str::to_owned).collect()))
        .collect();
    Ok(MetricsReport::compute(&responses, references.as_deref(), stop)?)
}

/// One metrics row per `(alpha, beta)` grid point.
pub fn tune(
    models: &Models,
    cfg: &DecoderConfig,
    prompts: &[Prompt],
    alphas: &[f64],
    betas: &[f64],
    stop: &StopList,
    jobs: usize,
) -> Result<String> {
    let mut rows = Vec::new();
    for &alpha in alphas {
        for &beta in betas {
            let point = DecoderConfig { alpha, beta, ..cfg.clone() };
            let records = decode_all(models, &point, prompts, false, jobs)?;
            log::info!("alpha={alpha} beta={beta}: {} prompts decoded", records.len());
            rows.push((format!("alpha={alpha} beta={beta}"), metrics(&records, stop)?));
        }
    }
    Ok(report_table(&rows))
}

/// Reads prompts until end of input; prints each top response with its
/// score decomposition.
pub fn repl(models: &Models, cfg: &DecoderConfig, vanilla: bool, input: impl BufRead, mut out: impl Write) -> Result<()> {
    cfg.validate()?;
    for line in input.lines() {
        let source = tokenize(&line?);
        if source.is_empty() {
            continue;
        }
        let record = decode_one(models, cfg, &Prompt { source, reference: None }, vanilla)?;
        match record.candidates.first() {
            Some(c) => {
                writeln!(out, "{}", c.text())?;
                let reverse = c.reverse_score.map_or("-".to_owned(), |r| format!("{r:.4}"));
                writeln!(
                    out,
                    "  loglik {:.4}  topic {:.4}  semantic {:.4}  reverse {reverse}  total {:.4}",
                    c.loglik, c.topic_score, c.semantic_score, c.total
                )?;
            }
            None => writeln!(out, "(no response)")?,
        }
        out.flush()?;
    }
    Ok(())
}

/// Next-word log-probabilities after `prefix`, split into stop-list and
/// topic-list words; at most `top` rows each.
pub fn diagnose(cfg: &RunConfig, models: &Models, source: &str, prefix: &str, top: usize, per_topic: usize) -> Result<String> {
    let constraints = models
        .constraints
        .as_ref()
        .ok_or_else(|| Usage("diagnose needs a topic model".into()))?;
    let vocab = &models.vocab;
    let stop_ids = artifacts::stop_list(cfg)?.ids(vocab);
    let topic_ids: HashSet<usize> = topic_word_list(&constraints.hmm, per_topic, &stop_ids)?;
    let src = vocab.encode(&split(source, true));
    let pre = vocab.encode(&split(prefix, true));
    let tables = diagnose_split(&models.forward, &src, &pre, &stop_ids, &topic_ids);
    let mut out = String::new();
    for (name, rows) in [("stop words", &tables.stop), ("topic words", &tables.topic)] {
        out.push_str(name);
        out.push('\n');
        for (w, lp) in rows.iter().take(top) {
            out.push_str(&format!("  {}\t{lp:.4}\n", vocab.token(*w)));
        }
    }
    Ok(out)
}
