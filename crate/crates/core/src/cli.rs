//! Command-line front end: argument and config-file handling, the evaluation
//! pipeline, and the `eval`, `compare` and `hash` commands.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::corpus::{load_raw, tokenize_corpus, RawCorpus, Task, TokenizedCorpus, TEST};
use crate::error::{Error, ErrorCategory, Result};
use crate::hashing::DataHashes;
use crate::metrics::{
    bleu_single, perplexity, distinct_n, fbh_bleu, fr_perplexity, original_perplexity,
    self_bleu, FbhConfig, MetricResult, SelfBleuConfig, TokenScores, DEFAULT_BLEU_N,
    DEFAULT_DISTINCT_N, DEFAULT_SAMPLE_SIZE,
};
use crate::ngram::DEFAULT_ORDER;
use crate::report::{compare_reports, read_report, write_report, EvalReport};
use crate::tokenizer::{TokenizerKind, TokenizerSpec};
use crate::vocab::Vocab;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INCOMPARABLE: i32 = 3;

pub fn exit_code(err: &Error) -> i32 {
    match err.category() {
        ErrorCategory::Config => EXIT_CONFIG,
        ErrorCategory::Data => EXIT_DATA,
    }
}

/// One selected metric with its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricSpec {
    Perplexity,
    OriginalPerplexity,
    Bleu(usize),
    SelfBleu(usize),
    FbhBleu(usize),
    FrPerplexity(usize),
    Distinct(usize),
}

impl MetricSpec {
    pub fn needs_hyps(self) -> bool {
        !matches!(self, MetricSpec::Perplexity | MetricSpec::OriginalPerplexity)
    }

    pub fn needs_scores(self) -> bool {
        matches!(self, MetricSpec::Perplexity | MetricSpec::OriginalPerplexity)
    }

    /// Parses a comma-separated selection such as `perplexity,bleu=4,distinct=2`.
    pub fn parse_list(s: &str) -> Result<Vec<MetricSpec>> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(MetricSpec::from_str)
            .collect()
    }
}

impl FromStr for MetricSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = match s.split_once('=') {
            Some((n, p)) => {
                let v: usize = p
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("metric {s:?}: parameter must be a positive integer")))?;
                if v == 0 {
                    return Err(Error::Config(format!("metric {s:?}: parameter must be at least 1")));
                }
                (n.trim(), Some(v))
            }
            None => (s.trim(), None),
        };
        let or = |d: usize| param.unwrap_or(d);
        let spec = match name {
            "perplexity" | "ppl" => MetricSpec::Perplexity,
            "perplexity-original" => MetricSpec::OriginalPerplexity,
            "bleu" => MetricSpec::Bleu(or(DEFAULT_BLEU_N)),
            "self-bleu" => MetricSpec::SelfBleu(or(DEFAULT_BLEU_N)),
            "fbh-bleu" => MetricSpec::FbhBleu(or(DEFAULT_BLEU_N)),
            "fr-perplexity" => MetricSpec::FrPerplexity(or(DEFAULT_ORDER)),
            "distinct" => MetricSpec::Distinct(or(DEFAULT_DISTINCT_N)),
            _ => return Err(Error::Config(format!("unknown metric {name:?}"))),
        };
        if param.is_some() && matches!(spec, MetricSpec::Perplexity | MetricSpec::OriginalPerplexity) {
            return Err(Error::Config(format!("metric {name:?} takes no parameter")));
        }
        Ok(spec)
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricSpec::Perplexity => write!(f, "perplexity"),
            MetricSpec::OriginalPerplexity => write!(f, "perplexity-original"),
            MetricSpec::Bleu(n) => write!(f, "bleu={n}"),
            MetricSpec::SelfBleu(n) => write!(f, "self-bleu={n}"),
            MetricSpec::FbhBleu(n) => write!(f, "fbh-bleu={n}"),
            MetricSpec::FrPerplexity(n) => write!(f, "fr-perplexity={n}"),
            MetricSpec::Distinct(n) => write!(f, "distinct={n}"),
        }
    }
}

/// What determines the five data-loader hashes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataConfig {
    pub task: Task,
    pub corpus: PathBuf,
    pub tokenizer: TokenizerSpec,
    pub t_min: usize,
}

impl DataConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_min == 0 {
            return Err(Error::Config("tmin must be at least 1".into()));
        }
        if !self.corpus.is_dir() {
            return Err(Error::Config(format!(
                "corpus: {} is not a directory",
                self.corpus.display()
            )));
        }
        self.tokenizer.validate()?;
        if let Some(p) = &self.tokenizer.bpe_merges_path {
            require_file("bpe_merges", p)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: DataConfig,
    pub metrics: Vec<MetricSpec>,
    pub hyps: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub seed: u64,
    pub sample_size: usize,
    pub out: Option<PathBuf>,
    pub metadata: BTreeMap<String, String>,
}

fn require_file(field: &str, path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Config(format!("{field}: {} does not exist", path.display())))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.data.validate()?;
        if self.metrics.is_empty() {
            return Err(Error::Config("metrics: no metric selected".into()));
        }
        let mut seen = BTreeSet::new();
        for m in &self.metrics {
            if !seen.insert(m) {
                return Err(Error::Config(format!("metrics: {m} selected twice")));
            }
        }
        if self.sample_size == 0 {
            return Err(Error::Config("sample_size must be at least 1".into()));
        }
        let checks = [
            ("hyps", &self.hyps, self.metrics.iter().find(|m| m.needs_hyps())),
            ("scores", &self.scores, self.metrics.iter().find(|m| m.needs_scores())),
        ];
        for (field, path, needed_by) in checks {
            match (path, needed_by) {
                (Some(p), _) => require_file(field, p)?,
                (None, Some(m)) => {
                    return Err(Error::Config(format!("{field}: required by metric {m}")))
                }
                (None, None) => {}
            }
        }
        Ok(())
    }
}

/// A corpus loaded, tokenized and indexed, ready for hashing and scoring.
pub struct Prepared {
    pub raw: RawCorpus,
    pub corpus: TokenizedCorpus,
    pub vocab: Vocab,
    pub hashes: DataHashes,
}

pub fn prepare(data: &DataConfig) -> Result<Prepared> {
    data.validate()?;
    let raw = load_raw(&data.corpus, data.task)?;
    let corpus = tokenize_corpus(&raw, &data.tokenizer)?;
    let vocab = Vocab::build(&corpus, data.t_min)?;
    let hashes = DataHashes::compute(&raw, &corpus, &vocab);
    Ok(Prepared { raw, corpus, vocab, hashes })
}

/// Reads a hypotheses file: one generated sentence per line.
pub fn read_hyps(path: &Path) -> Result<Vec<String>> {
    let bytes = std::fs::read(path).map_err(|e| Error::load(path, e))?;
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::parse(path.display().to_string(), "not valid UTF-8"))?;
    Ok(text.lines().map(str::to_string).collect())
}

/// Runs the full pipeline and returns the report without writing it.
pub fn evaluate(cfg: &RunConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let p = prepare(&cfg.data)?;
    let tokenizer = p.corpus.tokenizer();
    let hyps: Option<Vec<Vec<String>>> = match &cfg.hyps {
        Some(path) => Some(
            read_hyps(path)?
                .iter()
                .map(|line| tokenizer.surface_tokens(&tokenizer.tokenize(line)))
                .collect(),
        ),
        None => None,
    };
    let scores = match &cfg.scores {
        Some(path) => Some(TokenScores::from_file(path)?),
        None => None,
    };
    let refs = p.corpus.targets(TEST);
    let surface_refs = p.corpus.surface_targets(TEST);
    let hyps_ref = || hyps.as_deref().expect("validated: hyps present");
    let scores_ref = || scores.as_ref().expect("validated: scores present");

    let mut report = EvalReport::new(p.corpus.task, p.hashes);
    report.metadata = cfg.metadata.clone();
    for spec in &cfg.metrics {
        let result: MetricResult = match *spec {
            MetricSpec::Perplexity => perplexity(&refs, scores_ref(), &p.vocab)?,
            MetricSpec::OriginalPerplexity => original_perplexity(&refs, scores_ref(), &p.vocab)?,
            MetricSpec::Bleu(n) => {
                let h = hyps_ref();
                if h.len() != surface_refs.len() {
                    return Err(Error::Input(format!(
                        "bleu: {} hypotheses for {} test samples",
                        h.len(),
                        surface_refs.len()
                    )));
                }
                bleu_single(h, &surface_refs, n)?
            }
            MetricSpec::SelfBleu(n) => self_bleu(
                hyps_ref(),
                SelfBleuConfig { max_n: n, sample_size: cfg.sample_size, seed: cfg.seed },
            )?,
            MetricSpec::FbhBleu(n) => fbh_bleu(
                hyps_ref(),
                &surface_refs,
                FbhConfig {
                    max_n: n,
                    gen_sample_size: cfg.sample_size,
                    ref_sample_size: cfg.sample_size,
                    seed: cfg.seed,
                },
            )?,
            MetricSpec::FrPerplexity(order) => fr_perplexity(hyps_ref(), &surface_refs, order)?,
            MetricSpec::Distinct(n) => distinct_n(hyps_ref(), n)?,
        };
        report.metrics.push(result);
    }
    Ok(report)
}

/// Evaluates and writes the report to `cfg.out`, or returns its text when no
/// output path is set.
pub fn cmd_eval(cfg: &RunConfig) -> Result<(EvalReport, Option<String>)> {
    let report = evaluate(cfg)?;
    match &cfg.out {
        Some(path) => {
            write_report(&report, path)?;
            Ok((report, None))
        }
        None => {
            let text = report.to_json();
            Ok((report, Some(text)))
        }
    }
}

// ---------------------------------------------------------------------------
// Argument parsing

#[derive(Debug, Parser)]
#[command(name = "geneval", version, about = "Comparison-safe evaluation of generated text")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the selected metrics and write an evaluation report.
    Eval(EvalArgs),
    /// Decide which metrics of two reports are comparable.
    Compare {
        a: PathBuf,
        b: PathBuf,
    },
    /// Print the five data-loader hash codes of a corpus.
    Hash {
        #[command(flatten)]
        data: DataArgs,
        /// Print the 6-character prefixes only.
        #[arg(long)]
        short: bool,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct DataArgs {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// gen, single-turn or multi-turn.
    #[arg(long)]
    pub task: Option<Task>,
    /// Directory holding train.txt, test.txt and optionally dev.txt.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// standard-word or bpe.
    #[arg(long)]
    pub tokenizer: Option<TokenizerKind>,
    #[arg(long)]
    pub bpe_merges: Option<PathBuf>,
    /// Frequency threshold of the frequent vocabulary.
    #[arg(long)]
    pub tmin: Option<usize>,
    #[arg(long, overrides_with = "no_lowercase")]
    pub lowercase: bool,
    #[arg(long, overrides_with = "lowercase")]
    pub no_lowercase: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated, e.g. `perplexity,bleu=4,self-bleu,fbh-bleu,fr-perplexity=5,distinct=2`.
    #[arg(long)]
    pub metrics: Option<String>,
    /// Generated sentences, one per line, aligned with the test samples.
    #[arg(long)]
    pub hyps: Option<PathBuf>,
    /// Per-token log-probabilities of the test targets (JSON Lines).
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sentences sampled by self-BLEU and forward/backward BLEU.
    #[arg(long)]
    pub sample_size: Option<usize>,
    /// Report path; the report goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run metadata as key=value, repeatable.
    #[arg(long = "meta", value_parser = parse_key_value)]
    pub meta: Vec<(String, String)>,
}

fn parse_key_value(s: &str) -> std::result::Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .ok_or_else(|| format!("expected key=value, got {s:?}"))
}

#[derive(Debug, Default, Deserialize)]
#[serde(untagged)]
enum MetricList {
    #[default]
    None,
    Joined(String),
    Items(Vec<String>),
}

/// Config-file mirror of the flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    task: Option<Task>,
    corpus: Option<PathBuf>,
    tokenizer: Option<TokenizerKind>,
    bpe_merges: Option<PathBuf>,
    tmin: Option<usize>,
    lowercase: Option<bool>,
    #[serde(default)]
    metrics: MetricList,
    hyps: Option<PathBuf>,
    scores: Option<PathBuf>,
    seed: Option<u64>,
    sample_size: Option<usize>,
    out: Option<PathBuf>,
    #[serde(default)]
    meta: BTreeMap<String, String>,
}

impl FileConfig {
    fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut cfg: FileConfig = toml::from_str(&text).map_err(|e| Error::ConfigFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.corpus,
            &mut cfg.bpe_merges,
            &mut cfg.hyps,
            &mut cfg.scores,
            &mut cfg.out,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

fn data_config(args: &DataArgs, file: &FileConfig) -> Result<DataConfig> {
    let task = args
        .task
        .or(file.task)
        .ok_or_else(|| Error::Config("task: missing (--task)".into()))?;
    let corpus = args
        .corpus
        .clone()
        .or_else(|| file.corpus.clone())
        .ok_or_else(|| Error::Config("corpus: missing (--corpus)".into()))?;
    let lowercase = if args.lowercase {
        true
    } else if args.no_lowercase {
        false
    } else {
        file.lowercase.unwrap_or(true)
    };
    let merges = args.bpe_merges.clone().or_else(|| file.bpe_merges.clone());
    let kind = args.tokenizer.or(file.tokenizer).unwrap_or(match merges {
        Some(_) => TokenizerKind::Bpe,
        None => TokenizerKind::StandardWord,
    });
    let tokenizer = TokenizerSpec {
        kind,
        lowercase,
        bpe_merges_path: merges,
    };
    Ok(DataConfig {
        task,
        corpus,
        tokenizer,
        t_min: args.tmin.or(file.tmin).unwrap_or(1),
    })
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    path.map(FileConfig::load).transpose().map(Option::unwrap_or_default)
}

impl DataArgs {
    pub fn resolve(&self) -> Result<DataConfig> {
        let file = load_file_config(self.config.as_deref())?;
        data_config(self, &file)
    }
}

impl EvalArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let file = load_file_config(self.data.config.as_deref())?;
        let data = data_config(&self.data, &file)?;
        let metrics = match (&self.metrics, &file.metrics) {
            (Some(s), _) => MetricSpec::parse_list(s)?,
            (None, MetricList::Joined(s)) => MetricSpec::parse_list(s)?,
            (None, MetricList::Items(v)) => v.iter().map(|s| s.parse()).collect::<Result<_>>()?,
            (None, MetricList::None) => Vec::new(),
        };
        let mut metadata = file.meta.clone();
        metadata.extend(self.meta.iter().cloned());
        Ok(RunConfig {
            data,
            metrics,
            hyps: self.hyps.clone().or_else(|| file.hyps.clone()),
            scores: self.scores.clone().or_else(|| file.scores.clone()),
            seed: self.seed.or(file.seed).unwrap_or(0),
            sample_size: self.sample_size.or(file.sample_size).unwrap_or(DEFAULT_SAMPLE_SIZE),
            out: self.out.clone().or_else(|| file.out.clone()),
            metadata,
        })
    }
}

pub fn format_hashes(hashes: &DataHashes, short: bool) -> String {
    let mut out = String::new();
    for (name, h) in hashes.entries() {
        let shown = if short { h.short() } else { h.hex() };
        out.push_str(&format!("{name:<8}  {shown}\n"));
    }
    out
}

/// Executes a parsed command, writing normal output to `out` and diagnostics
/// to `err`. Returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result: Result<i32> = (|| match cli.command {
        Command::Eval(args) => {
            let cfg = args.resolve()?;
            let (report, text) = cmd_eval(&cfg)?;
            match text {
                Some(t) => {
                    let _ = out.write_all(t.as_bytes());
                }
                None => {
                    for m in &report.metrics {
                        let _ = writeln!(err, "{}  {}  {}", m.metric, serde_json::to_string(&m.value).unwrap_or_default(), m.hash.short());
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Command::Compare { a, b } => {
            let ra = read_report(&a)?;
            let rb = read_report(&b)?;
            let cmp = compare_reports(&ra, &rb);
            let _ = write!(out, "{cmp}");
            Ok(if cmp.all_comparable() { EXIT_OK } else { EXIT_INCOMPARABLE })
        }
        Command::Hash { data, short } => {
            let p = prepare(&data.resolve()?)?;
            let _ = out.write_all(format_hashes(&p.hashes, short).as_bytes());
            Ok(EXIT_OK)
        }
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(rendered.as_bytes()) } else { out.write_all(rendered.as_bytes()) };
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_list_parsing() {
        let v = MetricSpec::parse_list("perplexity, bleu=3,self-bleu,fbh-bleu=2,fr-perplexity,distinct=1").unwrap();
        assert_eq!(
            v,
            [
                MetricSpec::Perplexity,
                MetricSpec::Bleu(3),
                MetricSpec::SelfBleu(4),
                MetricSpec::FbhBleu(2),
                MetricSpec::FrPerplexity(5),
                MetricSpec::Distinct(1),
            ]
        );
        for bad in ["rouge", "bleu=0", "bleu=x", "perplexity=2"] {
            assert!(MetricSpec::parse_list(bad).is_err(), "{bad}");
        }
        for m in v {
            assert_eq!(m.to_string().parse::<MetricSpec>().unwrap(), m);
        }
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "task = \"gen\"\ncorpus = \"data\"\ntmin = 3\nlowercase = false\nmetrics = [\"bleu=2\", \"distinct\"]\nhyps = \"h.txt\"\nseed = 7\n[meta]\nmodel = \"lm\"\n",
        )
        .unwrap();
        let args = EvalArgs {
            data: DataArgs { config: Some(path), tmin: Some(2), ..Default::default() },
            seed: Some(9),
            ..Default::default()
        };
        let cfg = args.resolve().unwrap();
        assert_eq!(cfg.data.task, Task::Gen);
        assert_eq!(cfg.data.corpus, dir.path().join("data"));
        assert_eq!(cfg.data.t_min, 2);
        assert!(!cfg.data.tokenizer.lowercase);
        assert_eq!(cfg.metrics, [MetricSpec::Bleu(2), MetricSpec::Distinct(2)]);
        assert_eq!(cfg.hyps, Some(dir.path().join("h.txt")));
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.metadata["model"], "lm");
    }

    #[test]
    fn unknown_config_key_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "task = \"gen\"\nbogus = 1\n").unwrap();
        let args = DataArgs { config: Some(path), ..Default::default() };
        let e = args.resolve().unwrap_err();
        assert_eq!(e.category(), ErrorCategory::Config);
        assert!(e.to_string().contains("run.toml"));
    }

    #[test]
    fn merges_flag_implies_bpe() {
        let args = DataArgs {
            task: Some(Task::Gen),
            corpus: Some("c".into()),
            bpe_merges: Some("m.txt".into()),
            no_lowercase: true,
            ..Default::default()
        };
        let d = args.resolve().unwrap();
        assert_eq!(d.tokenizer, TokenizerSpec::bpe("m.txt", false));
    }

    #[test]
    fn validation_names_the_field() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig {
            data: DataConfig {
                task: Task::Gen,
                corpus: dir.path().to_path_buf(),
                tokenizer: TokenizerSpec::default(),
                t_min: 1,
            },
            metrics: vec![MetricSpec::Perplexity],
            hyps: None,
            scores: None,
            seed: 0,
            sample_size: 10,
            out: None,
            metadata: BTreeMap::new(),
        };
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("scores") && msg.contains("perplexity"), "{msg}");
        cfg.scores = Some(dir.path().join("missing.jsonl"));
        assert!(cfg.validate().unwrap_err().to_string().contains("missing.jsonl"));
        cfg.data.t_min = 0;
        assert!(cfg.validate().unwrap_err().to_string().contains("tmin"));
    }
}
