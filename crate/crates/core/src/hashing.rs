//! SHA-256 hash codes for data loaders and metrics.
//!
//! Sample-level content is hashed one sample at a time; the per-sample
//! digests are sorted bytewise and hashed again, so reordering samples never
//! changes a hash.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::corpus::{RawCorpus, Task, TokenSample, TokenizedCorpus};
use crate::tokenizer::Tokenizer;
use crate::vocab::Vocab;

/// Separates tokens inside a serialized sentence.
pub const TOKEN_SEP: u8 = 0x1f;
/// Separates sentences inside a serialized sample.
pub const SENTENCE_SEP: u8 = 0x1e;

/// A SHA-256 digest rendered as 64 lowercase hex characters.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HashCode([u8; 32]);

impl HashCode {
    pub fn of(bytes: &[u8]) -> Self {
        HashCode(Sha256::digest(bytes).into())
    }

    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        HashCode(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn hex(&self) -> String {
        hex::encode(self.0)
    }

    /// Leading six hex characters, for display.
    pub fn short(&self) -> String {
        self.hex()[..6].to_string()
    }

    /// Parses a 64-character lowercase hex string.
    pub fn parse(s: &str) -> Result<Self, String> {
        if s.len() != 64 || !s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)) {
            return Err(format!("hash code must be 64 lowercase hex characters, got {s:?}"));
        }
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out).map_err(|e| e.to_string())?;
        Ok(HashCode(out))
    }
}

impl fmt::Display for HashCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.hex())
    }
}

impl fmt::Debug for HashCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HashCode({})", self.short())
    }
}

impl std::str::FromStr for HashCode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        HashCode::parse(s)
    }
}

impl Serialize for HashCode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.hex())
    }
}

impl<'de> Deserialize<'de> for HashCode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        HashCode::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Incremental hasher with length-prefixed fields, so field boundaries can
/// never be confused.
#[derive(Clone, Default)]
pub struct FieldHasher(Sha256);

impl FieldHasher {
    pub fn new(domain: &str) -> Self {
        let mut h = FieldHasher(Sha256::new());
        h.field(domain.as_bytes());
        h
    }

    pub fn field(&mut self, bytes: &[u8]) -> &mut Self {
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(bytes);
        self
    }

    pub fn hash(&mut self, code: &HashCode) -> &mut Self {
        self.field(code.as_bytes())
    }

    pub fn uint(&mut self, v: u64) -> &mut Self {
        self.field(&v.to_le_bytes())
    }

    pub fn finish(self) -> HashCode {
        HashCode(self.0.finalize().into())
    }
}

/// Combines per-item digests order-insensitively: sort, concatenate, hash.
pub fn combine_unordered(mut digests: Vec<[u8; 32]>) -> HashCode {
    digests.sort_unstable();
    let mut hasher = Sha256::new();
    for d in &digests {
        hasher.update(d);
    }
    HashCode(hasher.finalize().into())
}

/// Tokens joined by 0x1F.
pub fn serialize_sentence<S: AsRef<str>>(tokens: &[S], out: &mut Vec<u8>) {
    for (i, tok) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(TOKEN_SEP);
        }
        out.extend_from_slice(tok.as_ref().as_bytes());
    }
}

fn serialize_sample(sample: &TokenSample, out: &mut Vec<u8>) {
    for (i, sent) in sample.sentences().into_iter().enumerate() {
        if i > 0 {
            out.push(SENTENCE_SEP);
        }
        serialize_sentence(sent, out);
    }
}

fn sample_digest(split: &str, body: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(split.as_bytes());
    h.update([0u8]);
    h.update(body);
    h.finalize().into()
}

pub fn raw_data_hash(raw: &RawCorpus) -> HashCode {
    let digests = raw
        .splits
        .iter()
        .flat_map(|(name, samples)| samples.iter().map(move |s| (name, s)))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(name, s)| sample_digest(name, &s.raw_bytes()))
        .collect();
    combine_unordered(digests)
}

pub fn data_hash(corpus: &TokenizedCorpus) -> HashCode {
    let digests = corpus
        .splits
        .iter()
        .flat_map(|(name, samples)| samples.iter().map(move |s| (name, s)))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(name, s)| {
            let mut body = Vec::new();
            serialize_sample(s, &mut body);
            sample_digest(name, &body)
        })
        .collect();
    combine_unordered(digests)
}

/// Order-insensitive hash of a list of sentences (multi-reference entries
/// joined by 0x1E).
pub fn sentences_hash<S: AsRef<str> + Sync>(sentences: &[Vec<S>]) -> HashCode {
    let digests = sentences
        .par_iter()
        .map(|s| {
            let mut body = Vec::new();
            serialize_sentence(s, &mut body);
            Sha256::digest(&body).into()
        })
        .collect();
    combine_unordered(digests)
}

pub fn multi_sentences_hash<S: AsRef<str> + Sync>(groups: &[Vec<Vec<S>>]) -> HashCode {
    let digests = groups
        .par_iter()
        .map(|group| {
            let mut body = Vec::new();
            for (i, s) in group.iter().enumerate() {
                if i > 0 {
                    body.push(SENTENCE_SEP);
                }
                serialize_sentence(s, &mut body);
            }
            Sha256::digest(&body).into()
        })
        .collect();
    combine_unordered(digests)
}

fn vocab_fields(h: &mut FieldHasher, vocab: &Vocab) {
    h.uint(vocab.specials().len() as u64);
    for s in vocab.specials() {
        h.field(s.as_bytes());
    }
    h.uint(vocab.frequent().len() as u64);
    for t in vocab.frequent() {
        h.field(t.as_bytes());
    }
    h.uint(vocab.rare().len() as u64);
    for t in vocab.rare() {
        h.field(t.as_bytes());
    }
    h.uint(vocab.t_min() as u64);
}

pub fn vocab_hash(vocab: &Vocab) -> HashCode {
    let mut h = FieldHasher::new("vocab");
    vocab_fields(&mut h, vocab);
    h.finish()
}

/// Tokenizer configuration, vocabulary and task.
pub fn setting_hash(tokenizer: &Tokenizer, vocab: &Vocab, task: Task) -> HashCode {
    let mut h = FieldHasher::new("setting");
    h.field(&tokenizer.canonical_bytes());
    vocab_fields(&mut h, vocab);
    h.field(task.as_str().as_bytes());
    h.finish()
}

/// The five data-loader hash codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataHashes {
    pub raw_data: HashCode,
    pub data: HashCode,
    pub vocab: HashCode,
    pub setting: HashCode,
    pub general: HashCode,
}

impl DataHashes {
    pub const NAMES: [&'static str; 5] = ["raw_data", "data", "vocab", "setting", "general"];

    pub fn compute(raw: &RawCorpus, corpus: &TokenizedCorpus, vocab: &Vocab) -> Self {
        let raw_data = raw_data_hash(raw);
        let data = data_hash(corpus);
        let vocab_h = vocab_hash(vocab);
        let setting = setting_hash(corpus.tokenizer(), vocab, corpus.task);
        DataHashes {
            raw_data,
            data,
            vocab: vocab_h,
            setting,
            general: general_from_parts(&raw_data, &data, &vocab_h, &setting),
        }
    }

    pub fn entries(&self) -> [(&'static str, HashCode); 5] {
        [
            ("raw_data", self.raw_data),
            ("data", self.data),
            ("vocab", self.vocab),
            ("setting", self.setting),
            ("general", self.general),
        ]
    }

    /// True when `general` equals the hash of the other four.
    pub fn is_consistent(&self) -> bool {
        self.general == general_from_parts(&self.raw_data, &self.data, &self.vocab, &self.setting)
    }
}

/// SHA-256 of the four component digests concatenated in order.
pub fn general_from_parts(raw: &HashCode, data: &HashCode, vocab: &HashCode, setting: &HashCode) -> HashCode {
    let mut h = Sha256::new();
    for c in [raw, data, vocab, setting] {
        h.update(c.as_bytes());
    }
    HashCode(h.finalize().into())
}

pub fn general_hash(raw: &RawCorpus, corpus: &TokenizedCorpus, vocab: &Vocab) -> HashCode {
    DataHashes::compute(raw, corpus, vocab).general
}
