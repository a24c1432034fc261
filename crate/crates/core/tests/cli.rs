use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use geneval::cli::{prepare, DataConfig};
use geneval::corpus::Task;
use geneval::metrics::unigram_baseline_scores;
use geneval::report::read_report;
use geneval::tokenizer::TokenizerSpec;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn geneval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geneval")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_scores(dir: &Path, spec: TokenizerSpec, t_min: usize) -> PathBuf {
    let corpus = fixtures().join("single_turn");
    let data = DataConfig { task: Task::SingleTurn, corpus, tokenizer: spec, t_min };
    let prepared = prepare(&data).unwrap();
    let path = dir.join(format!("scores-{:?}.jsonl", data.tokenizer.kind));
    std::fs::write(&path, unigram_baseline_scores(&prepared.corpus, &prepared.vocab).to_jsonl()).unwrap();
    path
}

fn eval_single_turn(out: &Path, scores: &Path, extra: &[&str]) -> Output {
    let corpus = fixtures().join("single_turn");
    let hyps = corpus.join("hyps.txt");
    let mut args = vec![
        "eval", "--task", "single-turn", "--corpus", p(&corpus), "--tmin", "2",
        "--hyps", p(&hyps), "--scores", p(scores), "--out", p(out),
    ];
    args.extend_from_slice(extra);
    geneval(&args)
}

#[test]
fn eval_writes_exactly_the_selected_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let scores = write_scores(tmp.path(), TokenizerSpec::standard(true), 2);
    let out = tmp.path().join("run.evalreport");
    let o = eval_single_turn(&out, &scores, &["--metrics", "perplexity,bleu=2,distinct=3", "--meta", "model=unigram"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = read_report(&out).unwrap();
    let names: Vec<&str> = report.metrics.iter().map(|m| m.metric.as_str()).collect();
    assert_eq!(names, ["perplexity", "bleu-2", "distinct-3"]);
    assert_eq!(report.metadata["model"], "unigram");
    assert!(report.hashes.is_consistent());
    assert!(stderr(&o).contains("bleu-2"));
}

#[test]
fn eval_to_stdout_matches_file() {
    let tmp = tempfile::tempdir().unwrap();
    let scores = write_scores(tmp.path(), TokenizerSpec::standard(true), 2);
    let out = tmp.path().join("run.evalreport");
    let o = eval_single_turn(&out, &scores, &["--metrics", "perplexity,self-bleu"]);
    assert_eq!(code(&o), 0);
    let corpus = fixtures().join("single_turn");
    let o = geneval(&[
        "eval", "--task", "single-turn", "--corpus", p(&corpus), "--tmin", "2", "--hyps",
        p(&corpus.join("hyps.txt")), "--scores", p(&scores), "--metrics", "perplexity,self-bleu",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), std::fs::read_to_string(&out).unwrap());
}

#[test]
fn missing_scores_is_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run.evalreport");
    let missing = tmp.path().join("nope.jsonl");
    let o = eval_single_turn(&out, &missing, &["--metrics", "perplexity"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("nope.jsonl"), "{}", stderr(&o));
    assert!(!out.exists());

    let corpus = fixtures().join("single_turn");
    let o = geneval(&["eval", "--task", "single-turn", "--corpus", p(&corpus), "--metrics", "perplexity"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("scores"), "{}", stderr(&o));
}

#[test]
fn bad_flags_exit_one() {
    assert_eq!(code(&geneval(&["eval", "--bogus"])), 1);
    assert_eq!(code(&geneval(&["hash", "--task", "dialogue", "--corpus", "."])), 1);
    assert_eq!(code(&geneval(&["hash", "--task", "gen", "--corpus", ".", "--tmin", "0"])), 1);
    assert_eq!(code(&geneval(&["--help"])), 0);
    assert_eq!(code(&geneval(&["--version"])), 0);
}

#[test]
fn malformed_corpus_is_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("train.txt"), "hi\thello\nno tab here\n").unwrap();
    std::fs::write(tmp.path().join("test.txt"), "a\tb\n").unwrap();
    let o = geneval(&["hash", "--task", "single-turn", "--corpus", p(tmp.path())]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("train.txt:2"), "{}", stderr(&o));

    std::fs::remove_file(tmp.path().join("test.txt")).unwrap();
    let o = geneval(&["hash", "--task", "single-turn", "--corpus", p(tmp.path())]);
    assert_eq!(code(&o), 2);
}

#[test]
fn misaligned_scores_is_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let scores = write_scores(tmp.path(), TokenizerSpec::standard(true), 2);
    let text = std::fs::read_to_string(&scores).unwrap();
    let short: String = text.lines().skip(1).map(|l| format!("{l}\n")).collect();
    std::fs::write(&scores, short).unwrap();
    let out = tmp.path().join("run.evalreport");
    let o = eval_single_turn(&out, &scores, &["--metrics", "perplexity"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn compare_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let std_scores = write_scores(tmp.path(), TokenizerSpec::standard(true), 2);
    let merges = fixtures().join("merges.txt");
    let bpe_scores = write_scores(tmp.path(), TokenizerSpec::bpe(&merges, true), 2);
    let a = tmp.path().join("a.evalreport");
    let b = tmp.path().join("b.evalreport");
    let c = tmp.path().join("c.evalreport");
    assert_eq!(code(&eval_single_turn(&a, &std_scores, &["--metrics", "perplexity,bleu"])), 0);
    assert_eq!(code(&eval_single_turn(&b, &bpe_scores, &["--metrics", "perplexity,bleu", "--bpe-merges", p(&merges)])), 0);
    assert_eq!(code(&eval_single_turn(&c, &std_scores, &["--metrics", "distinct"])), 0);

    let o = geneval(&["compare", p(&a), p(&a)]);
    assert_eq!(code(&o), 0);
    assert!(!stdout(&o).contains("INCOMPARABLE"));

    let o = geneval(&["compare", p(&a), p(&b)]);
    assert_eq!(code(&o), 3);
    let table = stdout(&o);
    let line = |name: &str| table.lines().find(|l| l.starts_with(name)).unwrap().to_string();
    assert!(line("perplexity").ends_with("INCOMPARABLE"), "{table}");
    assert!(line("bleu-4").ends_with(" COMPARABLE"), "{table}");
    assert!(table.contains("differing data hashes: data, vocab, setting, general"), "{table}");
    let back = geneval(&["compare", p(&b), p(&a)]);
    assert_eq!(code(&back), 3);

    let o = geneval(&["compare", p(&a), p(&c)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("only in a") && stdout(&o).contains("only in b"));
}

#[test]
fn compare_rejects_tampered_report() {
    let tmp = tempfile::tempdir().unwrap();
    let scores = write_scores(tmp.path(), TokenizerSpec::standard(true), 2);
    let a = tmp.path().join("a.evalreport");
    assert_eq!(code(&eval_single_turn(&a, &scores, &["--metrics", "perplexity"])), 0);
    let report = read_report(&a).unwrap();
    let text = std::fs::read_to_string(&a).unwrap();
    let broken = text.replace(&report.hashes.general.hex(), &report.hashes.raw_data.hex());
    let bad = tmp.path().join("bad.evalreport");
    std::fs::write(&bad, broken).unwrap();
    let o = geneval(&["compare", p(&a), p(&bad)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("general"), "{}", stderr(&o));
}

#[test]
fn hash_is_deterministic_and_accepts_empty_dev() {
    let gen = fixtures().join("gen");
    assert_eq!(std::fs::read_to_string(gen.join("dev.txt")).unwrap(), "");
    let args = ["hash", "--task", "gen", "--corpus", p(&gen)];
    let first = geneval(&args);
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    assert_eq!(stdout(&first), stdout(&geneval(&args)));
    let text = stdout(&first);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    for (line, name) in lines.iter().zip(["raw_data", "data", "vocab", "setting", "general"]) {
        let (k, v) = line.split_once(char::is_whitespace).unwrap();
        assert_eq!(k, name);
        assert_eq!(v.trim().len(), 64);
    }
    let short = geneval(&["hash", "--task", "gen", "--corpus", p(&gen), "--short"]);
    for (full, short) in stdout(&first).lines().zip(stdout(&short).lines()) {
        let f = full.split_whitespace().nth(1).unwrap();
        let s = short.split_whitespace().nth(1).unwrap();
        assert_eq!(s.len(), 6);
        assert!(f.starts_with(s));
    }
}

#[test]
fn hash_rows_follow_the_changed_part() {
    let corpus = fixtures().join("single_turn");
    let merges = fixtures().join("merges.txt");
    let run = |extra: &[&str]| {
        let mut args = vec!["hash", "--task", "single-turn", "--corpus", p(&corpus)];
        args.extend_from_slice(extra);
        let o = geneval(&args);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        stdout(&o).lines().map(str::to_string).collect::<Vec<_>>()
    };
    let base = run(&["--tmin", "2"]);
    let changed = |other: &[String]| -> Vec<usize> { (0..5).filter(|&i| base[i] != other[i]).collect() };
    assert_eq!(changed(&run(&["--tmin", "4"])), [2, 3, 4]);
    assert_eq!(changed(&run(&["--tmin", "2", "--bpe-merges", p(&merges)])), [1, 2, 3, 4]);
    assert_eq!(changed(&run(&["--tmin", "2", "--no-lowercase"])), [1, 2, 3, 4]);
}

#[test]
fn multi_turn_eval() {
    let dir = fixtures().join("multi_turn");
    let o = geneval(&[
        "eval", "--task", "multi-turn", "--corpus", p(&dir), "--hyps", p(&dir.join("hyps.txt")),
        "--metrics", "bleu,fbh-bleu,fr-perplexity=3,distinct",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["task"], "multi-turn");
    assert_eq!(report["metrics"].as_array().unwrap().len(), 4);
}

#[test]
fn hypothesis_count_mismatch_is_data_error() {
    let dir = fixtures().join("gen");
    let o = geneval(&["eval", "--task", "gen", "--corpus", p(&dir), "--hyps", p(&dir.join("hyps.txt")), "--metrics", "bleu"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("12 hypotheses for 10 test samples"), "{}", stderr(&o));
    let o = geneval(&["eval", "--task", "gen", "--corpus", p(&dir), "--hyps", p(&dir.join("hyps.txt")), "--metrics", "self-bleu,distinct"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn config_file_mirrors_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let scores = write_scores(tmp.path(), TokenizerSpec::standard(true), 2);
    let corpus = fixtures().join("single_turn");
    let from_flags = tmp.path().join("flags.evalreport");
    let o = eval_single_turn(&from_flags, &scores, &["--metrics", "perplexity,bleu,self-bleu", "--seed", "4", "--sample-size", "10"]);
    assert_eq!(code(&o), 0);

    let cfg = tmp.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "task = \"single-turn\"\ncorpus = {:?}\ntmin = 2\nmetrics = \"perplexity,bleu,self-bleu\"\nhyps = {:?}\nscores = {:?}\nseed = 4\nsample_size = 10\nout = \"cfg.evalreport\"\n",
            p(&corpus),
            p(&corpus.join("hyps.txt")),
            p(&scores)
        ),
    )
    .unwrap();
    let o = geneval(&["eval", "--config", p(&cfg)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        std::fs::read(&from_flags).unwrap(),
        std::fs::read(tmp.path().join("cfg.evalreport")).unwrap()
    );
}
