//! Byte-pair-encoding subword tokenizer driven by a plain-text merges file.
//!
//! Pretokenization is whitespace-only. Every piece after the first piece of
//! a word carries the [`CONTINUATION`] prefix so the surface text can be
//! restored.

use std::collections::HashMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::UNK;
use crate::error::{Error, Result};

/// Prefix marking a subword piece that continues the previous piece.
pub const CONTINUATION: &str = "##";

/// Ordered merge rules; rank is the position in the merges file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BpeMerges {
    pairs: Vec<(String, String)>,
    ranks: HashMap<(String, String), usize>,
}

impl BpeMerges {
    /// Parses merges text: one `left right` pair per line, `#` comment lines
    /// and blank lines skipped. Errors carry the 1-based line number.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut merges = BpeMerges::default();
        for (idx, line) in text.lines().enumerate() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (Some(left), Some(right), None) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(format!(
                    "line {}: expected exactly two space-separated symbols",
                    idx + 1
                ));
            };
            merges.push(left.to_string(), right.to_string());
        }
        Ok(merges)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::ConfigFile {
            path: path.to_path_buf(),
            message: format!("cannot read merges file: {e}"),
        })?;
        let text = String::from_utf8(bytes).map_err(|_| Error::ConfigFile {
            path: path.to_path_buf(),
            message: "merges file is not valid UTF-8".into(),
        })?;
        Self::parse(&text).map_err(|message| Error::ConfigFile {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn from_pairs<I, A, B>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let mut merges = BpeMerges::default();
        for (a, b) in pairs {
            merges.push(a.into(), b.into());
        }
        merges
    }

    fn push(&mut self, left: String, right: String) {
        let key = (left, right);
        // first occurrence keeps its rank
        if !self.ranks.contains_key(&key) {
            self.ranks.insert(key.clone(), self.pairs.len());
            self.pairs.push(key);
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    /// SHA-256 over the canonical `left right\n` listing of the merges.
    pub fn digest(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        for (l, r) in &self.pairs {
            hasher.update(l.as_bytes());
            hasher.update(b" ");
            hasher.update(r.as_bytes());
            hasher.update(b"\n");
        }
        hasher.finalize().into()
    }

    fn rank(&self, left: &str, right: &str) -> Option<usize> {
        self.ranks.get(&(left.to_string(), right.to_string())).copied()
    }

    /// Applies merges greedily to one segment: repeatedly merge every
    /// occurrence of the lowest-ranked adjacent pair.
    fn encode_segment(&self, segment: &str) -> Vec<String> {
        let mut symbols: Vec<String> = segment.chars().map(String::from).collect();
        while symbols.len() > 1 {
            let best = symbols
                .windows(2)
                .filter_map(|w| self.rank(&w[0], &w[1]))
                .min();
            let Some(best) = best else { break };
            let (left, right) = &self.pairs[best];
            let mut merged = Vec::with_capacity(symbols.len());
            let mut i = 0;
            while i < symbols.len() {
                if i + 1 < symbols.len() && &symbols[i] == left && &symbols[i + 1] == right {
                    merged.push(format!("{left}{right}"));
                    i += 2;
                } else {
                    merged.push(std::mem::take(&mut symbols[i]));
                    i += 1;
                }
            }
            symbols = merged;
        }
        symbols
    }

    /// Encodes one whitespace-delimited word. Literal `<unk>` occurrences are
    /// emitted whole and restart piece numbering.
    pub(crate) fn encode_word(&self, word: &str, out: &mut Vec<String>) {
        let mut rest = word;
        loop {
            let (segment, tail) = match rest.find(UNK) {
                Some(pos) => (&rest[..pos], Some(&rest[pos + UNK.len()..])),
                None => (rest, None),
            };
            for (k, piece) in self.encode_segment(segment).into_iter().enumerate() {
                if k == 0 {
                    out.push(piece);
                } else {
                    out.push(format!("{CONTINUATION}{piece}"));
                }
            }
            match tail {
                Some(t) => {
                    out.push(UNK.to_string());
                    rest = t;
                }
                None => break,
            }
        }
    }
}

pub(crate) fn is_continuation(token: &str) -> bool {
    token.len() > CONTINUATION.len() && token.starts_with(CONTINUATION)
}
