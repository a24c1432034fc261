//! Task-shaped corpora: on-disk loading, tokenization and batching.
//!
//! A corpus directory holds `train.txt`, `test.txt` and optionally `dev.txt`.
//! Line formats by task:
//!
//! * `gen`: one sentence per line;
//! * `single-turn`: `post<TAB>response` per line;
//! * `multi-turn`: sessions of one utterance per line, separated by blank lines.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenizer::{Tokenizer, TokenizerSpec};
use crate::vocab::{IdMode, Vocab};

pub const TRAIN: &str = "train";
pub const DEV: &str = "dev";
pub const TEST: &str = "test";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Gen,
    SingleTurn,
    MultiTurn,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Gen => "gen",
            Task::SingleTurn => "single-turn",
            Task::MultiTurn => "multi-turn",
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gen" => Ok(Task::Gen),
            "single-turn" => Ok(Task::SingleTurn),
            "multi-turn" => Ok(Task::MultiTurn),
            other => Err(Error::Config(format!(
                "unknown task {other:?} (expected gen, single-turn or multi-turn)"
            ))),
        }
    }
}

/// One sample. `T` is a raw string or a token sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sample<T> {
    Sentence(T),
    Pair { post: T, response: T },
    Session(Vec<T>),
}

impl<T> Sample<T> {
    /// All sentences of the sample in reading order.
    pub fn sentences(&self) -> Vec<&T> {
        match self {
            Sample::Sentence(s) => vec![s],
            Sample::Pair { post, response } => vec![post, response],
            Sample::Session(turns) => turns.iter().collect(),
        }
    }

    /// The sentence a model is asked to generate: the sentence itself, the
    /// response of a pair, or the last utterance of a session.
    pub fn target(&self) -> &T {
        match self {
            Sample::Sentence(s) => s,
            Sample::Pair { response, .. } => response,
            Sample::Session(turns) => turns.last().expect("sessions are non-empty"),
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Sample<U> {
        match self {
            Sample::Sentence(s) => Sample::Sentence(f(s)),
            Sample::Pair { post, response } => Sample::Pair {
                post: f(post),
                response: f(response),
            },
            Sample::Session(turns) => Sample::Session(turns.iter().map(f).collect()),
        }
    }
}

pub type RawSample = Sample<String>;
pub type TokenSample = Sample<Vec<String>>;

impl RawSample {
    /// The sample's bytes as they appear on disk (without the final newline).
    pub fn raw_bytes(&self) -> Vec<u8> {
        match self {
            Sample::Sentence(s) => s.as_bytes().to_vec(),
            Sample::Pair { post, response } => format!("{post}\t{response}").into_bytes(),
            Sample::Session(turns) => turns.join("\n").into_bytes(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawCorpus {
    pub task: Task,
    pub splits: BTreeMap<String, Vec<RawSample>>,
}

impl RawCorpus {
    pub fn new(task: Task, splits: BTreeMap<String, Vec<RawSample>>) -> Result<Self> {
        for required in [TRAIN, TEST] {
            if !splits.contains_key(required) {
                return Err(Error::Input(format!("corpus has no {required:?} split")));
            }
        }
        Ok(RawCorpus { task, splits })
    }

    pub fn split(&self, name: &str) -> &[RawSample] {
        self.splits.get(name).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Parses one split file. `label` names the file in error messages.
pub fn parse_split(text: &str, task: Task, label: &str) -> Result<Vec<RawSample>> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    if body.is_empty() {
        return Ok(Vec::new());
    }
    let at = |line: usize| format!("{label}:{line}");
    let mut samples = Vec::new();
    let mut session: Vec<String> = Vec::new();
    for (idx, line) in body.split('\n').enumerate() {
        let lineno = idx + 1;
        if line.contains('\r') {
            return Err(Error::parse(at(lineno), "carriage return found; \\n line endings required"));
        }
        match task {
            Task::Gen => {
                if line.trim().is_empty() {
                    return Err(Error::parse(at(lineno), "empty sample"));
                }
                samples.push(Sample::Sentence(line.to_string()));
            }
            Task::SingleTurn => {
                let Some((post, response)) = line.split_once('\t') else {
                    return Err(Error::parse(at(lineno), "expected post<TAB>response"));
                };
                if response.contains('\t') {
                    return Err(Error::parse(at(lineno), "more than one tab"));
                }
                if post.trim().is_empty() || response.trim().is_empty() {
                    return Err(Error::parse(at(lineno), "empty post or response"));
                }
                samples.push(Sample::Pair {
                    post: post.to_string(),
                    response: response.to_string(),
                });
            }
            Task::MultiTurn => {
                if line.trim().is_empty() {
                    if !session.is_empty() {
                        samples.push(Sample::Session(std::mem::take(&mut session)));
                    }
                } else {
                    session.push(line.to_string());
                }
            }
        }
    }
    if !session.is_empty() {
        samples.push(Sample::Session(session));
    }
    Ok(samples)
}

/// Loads `train.txt`, `test.txt` and (if present) `dev.txt` from `dir`.
pub fn load_raw(dir: &Path, task: Task) -> Result<RawCorpus> {
    let mut splits = BTreeMap::new();
    for (name, required) in [(TRAIN, true), (DEV, false), (TEST, true)] {
        let path = dir.join(format!("{name}.txt"));
        if !required && !path.exists() {
            continue;
        }
        let bytes = std::fs::read(&path).map_err(|e| Error::load(&path, e))?;
        let label = path.display().to_string();
        let text = String::from_utf8(bytes)
            .map_err(|e| Error::parse(&label, format!("invalid UTF-8 at byte {}", e.utf8_error().valid_up_to())))?;
        splits.insert(name.to_string(), parse_split(&text, task, &label)?);
    }
    RawCorpus::new(task, splits)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedCorpus {
    pub task: Task,
    pub splits: BTreeMap<String, Vec<TokenSample>>,
    pub tokenizer_spec: TokenizerSpec,
    tokenizer: Tokenizer,
}

impl TokenizedCorpus {
    pub fn split(&self, name: &str) -> &[TokenSample] {
        self.splits.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn tokenizer(&self) -> &Tokenizer {
        &self.tokenizer
    }

    /// Generation targets of a split, in sample order.
    pub fn targets(&self, split: &str) -> Vec<Vec<String>> {
        self.split(split).iter().map(|s| s.target().clone()).collect()
    }

    /// Generation targets restored to surface words (see
    /// [`Tokenizer::surface_tokens`]).
    pub fn surface_targets(&self, split: &str) -> Vec<Vec<String>> {
        self.split(split)
            .iter()
            .map(|s| self.tokenizer.surface_tokens(s.target()))
            .collect()
    }
}

pub fn tokenize_corpus(raw: &RawCorpus, spec: &TokenizerSpec) -> Result<TokenizedCorpus> {
    let tokenizer = Tokenizer::from_spec(spec)?;
    Ok(tokenize_corpus_with(raw, &tokenizer, spec.clone()))
}

/// Tokenizes with an already constructed tokenizer.
pub fn tokenize_corpus_with(
    raw: &RawCorpus,
    tokenizer: &Tokenizer,
    spec: TokenizerSpec,
) -> TokenizedCorpus {
    let splits = raw
        .splits
        .iter()
        .map(|(name, samples)| {
            let tokenized: Vec<TokenSample> = samples
                .par_iter()
                .map(|s| s.map(|text| tokenizer.tokenize(text)))
                .collect();
            (name.clone(), tokenized)
        })
        .collect();
    TokenizedCorpus {
        task: raw.task,
        splits,
        tokenizer_spec: spec,
        tokenizer: tokenizer.clone(),
    }
}

/// Padded id matrix. Every row ends with the eos id at `lengths[i] - 1`
/// followed by pad ids up to the batch width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    pub ids: Vec<Vec<u32>>,
    pub lengths: Vec<usize>,
}

impl Batch {
    pub fn width(&self) -> usize {
        self.ids.first().map_or(0, Vec::len)
    }

    /// Token rows with eos and padding stripped.
    pub fn sentences(&self, vocab: &Vocab) -> Result<Vec<Vec<String>>> {
        self.ids
            .iter()
            .zip(&self.lengths)
            .map(|(row, &len)| vocab.to_tokens(&row[..len.saturating_sub(1)]))
            .collect()
    }
}

/// Packs a split into batches of `batch_size` samples. All sentences of a
/// sample go into the same batch, in reading order. Out-of-F tokens become unk.
pub fn make_batches(
    corpus: &TokenizedCorpus,
    vocab: &Vocab,
    split: &str,
    batch_size: usize,
    shuffle_seed: Option<u64>,
) -> Result<Vec<Batch>> {
    if batch_size == 0 {
        return Err(Error::Argument("batch_size must be positive".into()));
    }
    let samples = corpus.split(split);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    if let Some(seed) = shuffle_seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let pad = vocab.pad_id();
    let eos = vocab.eos_id();
    let batches = order
        .chunks(batch_size)
        .map(|chunk| {
            let rows: Vec<Vec<u32>> = chunk
                .iter()
                .flat_map(|&i| samples[i].sentences())
                .map(|sent| {
                    let mut ids = vocab.to_ids(sent, IdMode::Train);
                    ids.push(eos);
                    ids
                })
                .collect();
            let width = rows.iter().map(Vec::len).max().unwrap_or(0);
            let lengths = rows.iter().map(Vec::len).collect();
            let ids = rows
                .into_iter()
                .map(|mut r| {
                    r.resize(width, pad);
                    r
                })
                .collect();
            Batch { ids, lengths }
        })
        .collect();
    Ok(batches)
}
