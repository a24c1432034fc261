//! Tokenization: a rule-based word tokenizer, a BPE subword tokenizer, and the
//! standardizing retokenization used by every BLEU-family metric.

mod bpe;
mod standard;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bpe::{BpeMerges, CONTINUATION};
pub use standard::is_punct;

/// Surface form of the unknown-word token. Both tokenizers keep it atomic.
pub const UNK: &str = "<unk>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenizerKind {
    StandardWord,
    Bpe,
}

impl TokenizerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TokenizerKind::StandardWord => "standard-word",
            TokenizerKind::Bpe => "bpe",
        }
    }
}

impl std::str::FromStr for TokenizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard-word" | "standard" | "word" => Ok(TokenizerKind::StandardWord),
            "bpe" => Ok(TokenizerKind::Bpe),
            other => Err(Error::Config(format!(
                "unknown tokenizer kind {other:?} (expected standard-word or bpe)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerSpec {
    pub kind: TokenizerKind,
    pub lowercase: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bpe_merges_path: Option<PathBuf>,
}

impl TokenizerSpec {
    pub fn standard(lowercase: bool) -> Self {
        TokenizerSpec {
            kind: TokenizerKind::StandardWord,
            lowercase,
            bpe_merges_path: None,
        }
    }

    pub fn bpe(merges: impl Into<PathBuf>, lowercase: bool) -> Self {
        TokenizerSpec {
            kind: TokenizerKind::Bpe,
            lowercase,
            bpe_merges_path: Some(merges.into()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, &self.bpe_merges_path) {
            (TokenizerKind::Bpe, None) => Err(Error::Config(
                "bpe tokenizer requires a merges file".into(),
            )),
            (TokenizerKind::StandardWord, Some(p)) => Err(Error::Config(format!(
                "standard-word tokenizer does not take a merges file (got {})",
                p.display()
            ))),
            _ => Ok(()),
        }
    }
}

impl Default for TokenizerSpec {
    fn default() -> Self {
        TokenizerSpec::standard(true)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Engine {
    StandardWord,
    Bpe(BpeMerges),
}

/// A constructed tokenizer. Immutable, so it can be shared across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tokenizer {
    engine: Engine,
    lowercase: bool,
}

impl Tokenizer {
    /// Builds the tokenizer described by `spec`, reading the merges file for BPE.
    pub fn from_spec(spec: &TokenizerSpec) -> Result<Self> {
        spec.validate()?;
        match &spec.bpe_merges_path {
            Some(path) => Ok(Tokenizer::bpe(BpeMerges::from_file(path)?, spec.lowercase)),
            None => Ok(Tokenizer::standard(spec.lowercase)),
        }
    }

    pub fn standard(lowercase: bool) -> Self {
        Tokenizer {
            engine: Engine::StandardWord,
            lowercase,
        }
    }

    pub fn bpe(merges: BpeMerges, lowercase: bool) -> Self {
        Tokenizer {
            engine: Engine::Bpe(merges),
            lowercase,
        }
    }

    pub fn kind(&self) -> TokenizerKind {
        match self.engine {
            Engine::StandardWord => TokenizerKind::StandardWord,
            Engine::Bpe(_) => TokenizerKind::Bpe,
        }
    }

    pub fn lowercase(&self) -> bool {
        self.lowercase
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        match &self.engine {
            Engine::StandardWord => standard::tokenize(text, self.lowercase),
            Engine::Bpe(merges) => {
                let text = standard::normalize(text, self.lowercase);
                let mut out = Vec::new();
                for word in text.split_whitespace() {
                    merges.encode_word(word, &mut out);
                }
                out
            }
        }
    }

    /// Restores surface text. Word tokens are space-joined; BPE continuation
    /// pieces are glued back onto the preceding piece.
    pub fn detokenize<S: AsRef<str>>(&self, tokens: &[S]) -> String {
        match self.engine {
            Engine::StandardWord => detokenize(tokens),
            Engine::Bpe(_) => {
                let mut out = String::new();
                for tok in tokens {
                    let tok = tok.as_ref();
                    if bpe::is_continuation(tok) && !out.is_empty() {
                        out.push_str(&tok[CONTINUATION.len()..]);
                    } else {
                        if !out.is_empty() {
                            out.push(' ');
                        }
                        out.push_str(tok);
                    }
                }
                out
            }
        }
    }

    /// Whitespace-delimited surface units of a token sequence produced by this
    /// tokenizer. This is what BLEU-family metrics should receive.
    pub fn surface_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<String> {
        match self.engine {
            Engine::StandardWord => tokens.iter().map(|t| t.as_ref().to_string()).collect(),
            Engine::Bpe(_) => self
                .detokenize(tokens)
                .split_whitespace()
                .map(str::to_string)
                .collect(),
        }
    }

    /// Canonical byte serialization for setting hashes. BPE tokenizers are
    /// identified by the content of their merges, not by file path.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"kind=");
        out.extend_from_slice(self.kind().as_str().as_bytes());
        out.extend_from_slice(b"\nlowercase=");
        out.extend_from_slice(if self.lowercase { b"true" } else { b"false" });
        if let Engine::Bpe(merges) = &self.engine {
            out.extend_from_slice(b"\nmerges=");
            out.extend_from_slice(hex::encode(merges.digest()).as_bytes());
        }
        out.push(b'\n');
        out
    }
}

/// Tokenizes `text` under `spec`. Builds the tokenizer on every call; prefer
/// [`Tokenizer::from_spec`] for repeated use.
pub fn tokenize(text: &str, spec: &TokenizerSpec) -> Result<Vec<String>> {
    Ok(Tokenizer::from_spec(spec)?.tokenize(text))
}

/// Joins tokens with single spaces.
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    for (i, tok) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(tok.as_ref());
    }
    out
}

/// Re-splits a token sequence with the lowercasing standard word tokenizer.
pub fn standard_retokenize<S: AsRef<str>>(tokens: &[S]) -> Vec<String> {
    standard::tokenize(&detokenize(tokens), true)
}
