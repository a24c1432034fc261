//! Per-token model log-probabilities supplied by an external generator.
//!
//! File format: JSON Lines, one object per reference sentence:
//!
//! ```text
//! {"tokens":["how","are","you"],"lp_token":[-1.2,null,-0.7,-0.1],"lp_unk":[-5.0,-4.1,-6.2,-9.0]}
//! ```
//!
//! `lp_token` and `lp_unk` have one entry per token plus a final entry for
//! end-of-sentence. `lp_token[j]` is `null` when the model cannot emit the
//! token (it lies outside the frequent vocabulary).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentenceScores {
    pub tokens: Vec<String>,
    pub lp_token: Vec<Option<f64>>,
    pub lp_unk: Vec<f64>,
}

impl SentenceScores {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let want = self.tokens.len() + 1;
        if self.lp_token.len() != want || self.lp_unk.len() != want {
            return Err(format!(
                "expected {want} log-probabilities (tokens + eos), got lp_token={} lp_unk={}",
                self.lp_token.len(),
                self.lp_unk.len()
            ));
        }
        let bad = |v: f64| !(v.is_finite() && v <= 0.0);
        if self.lp_unk.iter().copied().any(bad) || self.lp_token.iter().flatten().copied().any(bad) {
            return Err("log-probabilities must be finite and <= 0".into());
        }
        if self.lp_token[want - 1].is_none() {
            return Err("end-of-sentence position needs lp_token".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TokenScores {
    pub sentences: Vec<SentenceScores>,
}

impl TokenScores {
    pub fn from_file(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::load(path, e))?;
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::parse(path.display().to_string(), "not valid UTF-8"))?;
        parse_token_scores(&text, &path.display().to_string())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.sentences {
            out.push_str(&serde_json::to_string(s).expect("scores serialize"));
            out.push('\n');
        }
        out
    }
}

/// Parses a JSON Lines scores document; blank lines are skipped.
pub fn parse_token_scores(text: &str, label: &str) -> Result<TokenScores> {
    let mut sentences = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let at = format!("{label}:{}", idx + 1);
        let s: SentenceScores =
            serde_json::from_str(line).map_err(|e| Error::parse(&at, format!("column {}: {e}", e.column())))?;
        s.validate().map_err(|m| Error::parse(&at, m))?;
        sentences.push(s);
    }
    Ok(TokenScores { sentences })
}
