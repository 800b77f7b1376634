//! `dcgen`: train the topic, embedding and language models, decode with
//! distributional constraints, and evaluate the output.

mod artifacts;
mod config;
mod decode;
mod train;

use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use dcgen_core::decoder::TaBias;
use dcgen_core::metrics::report_table;

use crate::artifacts::Models;
use crate::config::RunConfig;
use crate::decode::{Prompt, PromptSource};

/// A usage error: exits with status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Parser)]
#[command(name = "dcgen", version, about = "Response generation under topic and semantic constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (TOML); flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Directory holding the model artifacts.
    #[arg(long, global = true, value_name = "DIR")]
    model_dir: Option<PathBuf>,

    /// Stop-word list, one word per line (default: built-in list).
    #[arg(long, global = true, value_name = "FILE")]
    stopwords: Option<PathBuf>,

    /// Overwrite existing artifacts and output files.
    #[arg(long, global = true)]
    force: bool,

    /// More logging on standard error (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Train the HMM-LDA topic/syntax model by collapsed Gibbs sampling.
    TrainHmmlda {
        /// Training pairs, `source<TAB>target` per line.
        #[arg(long, value_name = "FILE")]
        pairs: Option<PathBuf>,
        /// Topic count; also resets alpha to 50/topics.
        #[arg(long)]
        topics: Option<usize>,
        /// Syntax classes including the topic class.
        #[arg(long)]
        classes: Option<usize>,
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long)]
        chains: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit the SIF sentence embedder.
    BuildSif {
        #[arg(long, value_name = "FILE")]
        pairs: Option<PathBuf>,
        /// Word vectors, `word f1 ... fd` per line (default: random vectors).
        #[arg(long, value_name = "FILE")]
        vectors: Option<PathBuf>,
        /// Dimension of random vectors.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train the forward and reverse n-gram / lexical-channel models.
    TrainLm {
        #[arg(long, value_name = "FILE")]
        pairs: Option<PathBuf>,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        discount: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Decode prompts to JSON lines.
    Decode {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        opts: DecodeOpts,
        /// Ignore the constraint models and the topic-word bias.
        #[arg(long)]
        vanilla: bool,
        /// Decoding threads; output order follows the input.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Output file (default: standard output).
        #[arg(long, short, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Re-score decoded candidates with the reverse model and re-sort them.
    Rerank {
        /// Decode output (JSON lines).
        input: PathBuf,
        #[command(flatten)]
        opts: DecodeOpts,
        #[arg(long, short, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Metrics table for one or more decode outputs.
    Eval {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Print the reports as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Decode under every (alpha, beta) grid point and tabulate metrics.
    Tune {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        opts: DecodeOpts,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        alpha_grid: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        beta_grid: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Next-word log-probabilities of stop words versus topic words.
    Diagnose {
        /// Source utterance.
        #[arg(long)]
        source: String,
        /// Response prefix already generated.
        #[arg(long, default_value = "")]
        prefix: String,
        /// Rows per table.
        #[arg(long, default_value_t = 15)]
        top: usize,
        /// Topic words taken from each topic.
        #[arg(long, default_value_t = 10)]
        per_topic: usize,
    },
    /// Read prompts from standard input and print the top response.
    Repl {
        #[command(flatten)]
        opts: DecodeOpts,
        #[arg(long)]
        vanilla: bool,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Inputs {
    /// Prompt pairs, `source<TAB>reference` per line.
    #[arg(long, value_name = "FILE")]
    pairs: Option<PathBuf>,
    /// Prompts, one per line, without references.
    #[arg(long, value_name = "FILE")]
    sources: Option<PathBuf>,
}

#[derive(Args)]
struct InputArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Sample at most N pairs from each source-length bucket.
    #[arg(long, value_name = "N", requires = "pairs")]
    bucket_sample: Option<usize>,
    /// Seed for bucket sampling (default: the decoder seed).
    #[arg(long)]
    sample_seed: Option<u64>,
}

#[derive(Args)]
struct DecodeOpts {
    /// Topic-constraint weight.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Semantic-constraint weight.
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long)]
    beam: Option<usize>,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long)]
    min_len: Option<usize>,
    /// Reverse-model weight when reranking.
    #[arg(long, allow_negative_numbers = true)]
    mmi_lambda: Option<f64>,
    /// Rank by the reverse score alone.
    #[arg(long)]
    mmi_reverse_only: bool,
    /// Add this bias to the source's dominant-topic words.
    #[arg(long, allow_negative_numbers = true)]
    ta_bias: Option<f64>,
    /// Size of the biased topic-word set.
    #[arg(long, requires = "ta_bias")]
    ta_words: Option<usize>,
    /// Weight of the n-gram model in the language-model mixture.
    #[arg(long)]
    lm_lambda: Option<f64>,
}

impl DecodeOpts {
    fn apply(&self, cfg: &mut RunConfig) {
        let d = &mut cfg.decoder;
        set(&mut d.alpha, self.alpha);
        set(&mut d.beta, self.beta);
        set(&mut d.beam_size, self.beam);
        set(&mut d.max_len, self.max_len);
        set(&mut d.min_len, self.min_len);
        set(&mut d.mmi_lambda, self.mmi_lambda);
        if self.mmi_reverse_only {
            d.keep_forward_in_mmi = false;
        }
        if let Some(bias) = self.ta_bias {
            let n_words = self.ta_words.unwrap_or(d.ta_bias.unwrap_or_default().n_words);
            d.ta_bias = Some(TaBias { bias, n_words });
        }
        set(&mut cfg.lm.lambda, self.lm_lambda);
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl InputArgs {
    fn load(&self, cfg: &RunConfig) -> Result<Vec<Prompt>> {
        let src = match (&self.inputs.pairs, &self.inputs.sources) {
            (Some(path), _) => PromptSource::Pairs {
                path,
                bucket_sample: self.bucket_sample,
                seed: self.sample_seed.unwrap_or(cfg.decoder.seed),
            },
            (None, Some(path)) => PromptSource::Lines(path),
            (None, None) => unreachable!("clap requires one input"),
        };
        decode::load_prompts(src, cfg.corpus.raw)
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.paths.model_dir, cli.model_dir.clone());
    if let Some(p) = &cli.stopwords {
        cfg.paths.stopwords = Some(p.clone());
    }
    let force = cli.force;
    match cli.command {
        Command::TrainHmmlda { pairs, topics, classes, burn_in, chains, seed } => {
            if let Some(k) = topics {
                cfg.hmmlda.alpha = 50.0 / k.max(1) as f64;
                cfg.hmmlda.num_topics = k;
            }
            set(&mut cfg.hmmlda.num_classes, classes);
            set(&mut cfg.hmmlda.burn_in, burn_in);
            set(&mut cfg.hmmlda.chains, chains);
            set(&mut cfg.hmmlda.seed, seed);
            set_pairs(&mut cfg, pairs);
            check_paths(&cfg)?;
            train::hmmlda(&cfg, force)
        }
        Command::BuildSif { pairs, vectors, dim, seed } => {
            if vectors.is_some() {
                cfg.paths.vectors = vectors;
            }
            set(&mut cfg.sif.random_dim, dim);
            set(&mut cfg.sif.seed, seed);
            set_pairs(&mut cfg, pairs);
            check_paths(&cfg)?;
            train::sif(&cfg, force)
        }
        Command::TrainLm { pairs, order, discount, iterations } => {
            set(&mut cfg.lm.order, order);
            set(&mut cfg.lm.discount, discount);
            set(&mut cfg.lm.ibm_iterations, iterations);
            set_pairs(&mut cfg, pairs);
            check_paths(&cfg)?;
            train::lm(&cfg, force)
        }
        Command::Decode { input, opts, vanilla, jobs, output } => {
            opts.apply(&mut cfg);
            check_paths(&cfg)?;
            if let Some(p) = &output {
                artifacts::check_writable(p, force)?;
            }
            let prompts = input.load(&cfg)?;
            let models = Models::load(&cfg, !vanilla)?;
            let records = decode::decode_all(&models, &cfg.decoder, &prompts, vanilla, jobs)?;
            log::info!("decoded {} prompts", records.len());
            decode::emit(output.as_deref(), &decode::to_jsonl(&records), force)
        }
        Command::Rerank { input, opts, output } => {
            opts.apply(&mut cfg);
            check_paths(&cfg)?;
            if let Some(p) = &output {
                artifacts::check_writable(p, force)?;
            }
            let records = decode::parse_jsonl(&input)?;
            let models = Models::load(&cfg, false)?;
            let records = decode::rerank(&models, &cfg.decoder, records)?;
            decode::emit(output.as_deref(), &decode::to_jsonl(&records), force)
        }
        Command::Eval { files, json } => {
            check_paths(&cfg)?;
            let stop = artifacts::stop_list(&cfg)?;
            let mut rows = Vec::new();
            for f in &files {
                let records = decode::parse_jsonl(f)?;
                if records.is_empty() {
                    anyhow::bail!("{}: no records", f.display());
                }
                rows.push((f.display().to_string(), decode::metrics(&records, &stop)?));
            }
            let text = if json {
                let mut s = String::new();
                for (name, report) in &rows {
                    s.push_str(&serde_json::json!({ "system": name, "metrics": report }).to_string());
                    s.push('\n');
                }
                s
            } else {
                report_table(&rows)
            };
            decode::emit(None, &text, force)
        }
        Command::Tune { input, opts, alpha_grid, beta_grid, jobs } => {
            opts.apply(&mut cfg);
            check_paths(&cfg)?;
            let prompts = input.load(&cfg)?;
            let models = Models::load(&cfg, true)?;
            let stop = artifacts::stop_list(&cfg)?;
            let table = decode::tune(&models, &cfg.decoder, &prompts, &alpha_grid, &beta_grid, &stop, jobs)?;
            decode::emit(None, &table, force)
        }
        Command::Diagnose { source, prefix, top, per_topic } => {
            check_paths(&cfg)?;
            let models = Models::load(&cfg, true)?;
            let text = decode::diagnose(&cfg, &models, &source, &prefix, top, per_topic)?;
            decode::emit(None, &text, force)
        }
        Command::Repl { opts, vanilla } => {
            opts.apply(&mut cfg);
            check_paths(&cfg)?;
            let models = Models::load(&cfg, !vanilla)?;
            let stdin = std::io::stdin();
            if stdin.is_terminal() {
                eprintln!("enter a prompt per line; end of input quits");
            }
            decode::repl(&models, &cfg.decoder, vanilla, stdin.lock(), std::io::stdout().lock())
        }
    }
}

fn set_pairs(cfg: &mut RunConfig, pairs: Option<PathBuf>) {
    if pairs.is_some() {
        cfg.paths.pairs = pairs;
    }
}

/// Every configured input path must exist before work starts.
fn check_paths(cfg: &RunConfig) -> Result<()> {
    let p = &cfg.paths;
    for path in [&p.pairs, &p.stopwords, &p.vectors].into_iter().flatten() {
        if !path.exists() {
            anyhow::bail!("{}: no such file", path.display());
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let usage = err.downcast_ref::<Usage>().is_some()
        || matches!(err.downcast_ref::<dcgen_core::Error>(), Some(dcgen_core::Error::InvalidConfig(_)));
    if usage {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
