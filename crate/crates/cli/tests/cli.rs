use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

const TOPICS: [[&str; 6]; 3] = [
    ["jacket", "coat", "scarf", "boots", "wool", "zipper"],
    ["pasta", "sauce", "garlic", "oven", "basil", "noodles"],
    ["guitar", "drums", "chord", "band", "song", "melody"],
];
const DULL: [&str; 4] = ["i don't know .", "me too .", "what ?", "yes ."];

/// Small conversational corpus: each conversation keeps to one topic.
fn corpus(pairs: usize, offset: usize) -> String {
    let mut turns = Vec::new();
    let mut i = offset;
    while turns.len() <= pairs + 20 {
        let t = &TOPICS[i % 3];
        for j in 0..6 {
            let k = i * 7 + j * 3;
            turns.push(match (k + j) % 5 {
                0 => DULL[k % 4].to_string(),
                1 => format!("i like the {} and the {} .", t[k % 6], t[(k + 1) % 6]),
                2 => format!("where is my {} ?", t[(k + 2) % 6]),
                3 => format!("the {} is near the {} .", t[(k + 3) % 6], t[(k + 4) % 6]),
                _ => format!("do you have a {} ?", t[(k + 5) % 6]),
            });
        }
        turns.push(String::new());
        i += 1;
    }
    let mut out = String::new();
    let mut n = 0;
    for w in turns.windows(2) {
        if n < pairs && !w[0].is_empty() && !w[1].is_empty() {
            out.push_str(&format!("{}\t{}\n", w[0], w[1]));
            n += 1;
        }
    }
    out
}

struct Run {
    dir: TempDir,
}

impl Run {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        fs::write(dir.path().join("train.tsv"), corpus(300, 0)).unwrap();
        fs::write(dir.path().join("test.tsv"), corpus(12, 1000)).unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn dcgen(&self, args: &[&str]) -> Output {
        self.dcgen_with_input(args, None)
    }

    fn dcgen_with_input(&self, args: &[&str], stdin: Option<&str>) -> Output {
        let mut child = Command::new(env!("CARGO_BIN_EXE_dcgen"))
            .args(args)
            .current_dir(self.dir.path())
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .unwrap();
        let mut pipe = child.stdin.take().unwrap();
        pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
        drop(pipe);
        child.wait_with_output().unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.dcgen(args);
        assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    }

    fn trained() -> Self {
        let run = Self::new();
        run.ok(&["train-hmmlda", "--pairs", "train.tsv", "--topics", "3", "--burn-in", "40", "--chains", "2", "--seed", "3"]);
        run.ok(&["build-sif", "--pairs", "train.tsv", "--dim", "8", "--seed", "5"]);
        run.ok(&["train-lm", "--pairs", "train.tsv", "--iterations", "5"]);
        run
    }
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn pipeline_is_reproducible() {
    let a = Run::trained();
    let b = Run::trained();
    let files = artifacts(&a.path("model"));
    assert_eq!(files.len(), 9);
    assert_eq!(files, artifacts(&b.path("model")));
    let decode = ["decode", "--pairs", "test.tsv", "--beam", "4"];
    let serial = a.ok(&decode);
    assert_eq!(serial, b.ok(&decode));
    assert_eq!(serial.lines().count(), 12);
    let parallel = a.ok(&[&decode[..], &["--jobs", "4"]].concat());
    assert_eq!(serial, parallel);
}

/// Per record: each candidate's tokens, log-likelihood and rerank total.
/// Vanilla decoding leaves the diagnostic constraint scores at zero.
fn ranked(jsonl: &str) -> Vec<Vec<(String, String, String)>> {
    jsonl
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            let cands = v["candidates"].as_array().unwrap();
            cands
                .iter()
                .map(|c| (c["tokens"].to_string(), c["loglik"].to_string(), c["total"].to_string()))
                .collect()
        })
        .collect()
}

#[test]
fn zero_weights_reproduce_vanilla_decoding() {
    let run = Run::trained();
    for extra in [&[][..], &["--mmi-lambda", "0"][..]] {
        let base = [&["decode", "--pairs", "test.tsv", "--beam", "5"][..], extra].concat();
        let zero = run.ok(&[&base[..], &["--alpha", "0", "--beta", "0"]].concat());
        let vanilla = run.ok(&[&base[..], &["--vanilla"]].concat());
        assert_eq!(ranked(&zero), ranked(&vanilla));
        assert_eq!(zero.lines().count(), 12);
    }
}

#[test]
fn decode_output_feeds_eval_and_rerank() {
    let run = Run::trained();
    run.ok(&["decode", "--pairs", "test.tsv", "-o", "out.jsonl"]);
    let table = run.ok(&["eval", "out.jsonl"]);
    assert!(table.starts_with("system"), "{table}");
    assert!(table.contains("out.jsonl"));
    let json = run.ok(&["eval", "--json", "out.jsonl"]);
    let v: serde_json::Value = serde_json::from_str(json.lines().next().unwrap()).unwrap();
    assert!(v["metrics"]["bleu1"].is_number());
    let first = fs::read_to_string(run.path("out.jsonl")).unwrap();
    let same = run.ok(&["rerank", "out.jsonl"]);
    assert_eq!(same, first);
    let reversed = run.ok(&["rerank", "out.jsonl", "--mmi-reverse-only", "-o", "rev.jsonl"]);
    assert!(reversed.is_empty());
    run.ok(&["eval", "out.jsonl", "rev.jsonl"]);
}

#[test]
fn tune_reports_every_grid_point() {
    let run = Run::trained();
    let table = run.ok(&["tune", "--pairs", "test.tsv", "--alpha-grid", "0,2,5", "--beta-grid", "0,2", "--beam", "3"]);
    let rows: Vec<&str> = table.lines().filter(|l| l.starts_with("alpha=")).collect();
    assert_eq!(rows.len(), 6, "{table}");
    assert!(rows[5].starts_with("alpha=5 beta=2"));
}

#[test]
fn repl_answers_each_line_until_end_of_input() {
    let run = Run::trained();
    let out = run.dcgen_with_input(&["repl", "--beam", "3"], Some("Where is my jacket?\n\ni like the guitar .\n"));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4, "{text}");
    for pair in lines.chunks(2) {
        assert!(!pair[0].is_empty() && !pair[0].starts_with(' '));
        assert!(pair[1].trim_start().starts_with("loglik") && pair[1].contains("total"));
    }
}

#[test]
fn diagnose_prints_both_tables() {
    let run = Run::trained();
    let text = run.ok(&["diagnose", "--source", "where is my jacket ?", "--prefix", "the", "--top", "3"]);
    let stop = text.find("stop words\n").unwrap();
    let topic = text.find("topic words\n").unwrap();
    assert!(stop < topic);
    assert_eq!(text.lines().count(), 8, "{text}");
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let run = Run::trained();
    fs::write(run.path("run.toml"), "[paths]\nmodel_dir = \"model\"\n\n[decoder]\nbeam_size = 1\n").unwrap();
    let one = run.ok(&["decode", "--config", "run.toml", "--sources", "test.tsv"]);
    for line in one.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["candidates"].as_array().unwrap().len(), 1);
    }
    let three = run.ok(&["decode", "--config", "run.toml", "--sources", "test.tsv", "--beam", "3"]);
    assert!(three.lines().any(|l| {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        v["candidates"].as_array().unwrap().len() > 1
    }));
}

#[test]
fn usage_errors_exit_with_two() {
    let run = Run::new();
    assert_eq!(code(&run.dcgen(&["frobnicate"])), 2);
    assert_eq!(code(&run.dcgen(&["decode"])), 2);
    assert_eq!(code(&run.dcgen(&["decode", "--pairs", "a", "--sources", "b"])), 2);
    assert_eq!(code(&run.dcgen(&["train-lm"])), 2);
    let trained = Run::trained();
    let again = trained.dcgen(&["train-lm", "--pairs", "train.tsv"]);
    assert_eq!(code(&again), 2);
    assert!(String::from_utf8_lossy(&again.stderr).contains("--force"));
    trained.ok(&["train-lm", "--pairs", "train.tsv", "--force"]);
    assert_eq!(code(&trained.dcgen(&["decode", "--pairs", "test.tsv", "--beam", "0"])), 2);
}

#[test]
fn data_errors_exit_with_one_and_name_the_path() {
    let run = Run::new();
    let missing = run.dcgen(&["train-hmmlda", "--pairs", "nowhere.tsv"]);
    assert_eq!(code(&missing), 1);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nowhere.tsv"));
    let no_models = run.dcgen(&["decode", "--pairs", "test.tsv", "--model-dir", "absent"]);
    assert_eq!(code(&no_models), 1);
    assert!(String::from_utf8_lossy(&no_models.stderr).contains("absent"));
    fs::write(run.path("bad.tsv"), "no tab here\n").unwrap();
    let bad = run.dcgen(&["train-lm", "--pairs", "bad.tsv"]);
    assert_eq!(code(&bad), 1);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("bad.tsv"));
    let no_config = run.dcgen(&["eval", "x.jsonl", "--config", "missing.toml"]);
    assert_eq!(code(&no_config), 1);
    assert!(String::from_utf8_lossy(&no_config.stderr).contains("missing.toml"));
}
