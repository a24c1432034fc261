//! Evaluation metrics. Each returns a [`MetricResult`] whose hash code covers
//! everything the score depends on besides the model itself.

mod bleu;
mod distinct;
mod lm;
mod perplexity;
mod sampled;
mod scores;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::HashCode;

pub use bleu::{bleu, bleu_single, BleuStats};
pub use distinct::distinct_n;
pub use lm::fr_perplexity;
pub use perplexity::{perplexity, original_perplexity, unigram_baseline_scores};
pub use sampled::{fbh_bleu, sample_indices, self_bleu, FbhConfig, SelfBleuConfig};
pub use scores::{parse_token_scores, SentenceScores, TokenScores};

pub const DEFAULT_BLEU_N: usize = 4;
pub const DEFAULT_SAMPLE_SIZE: usize = 1000;
pub const DEFAULT_DISTINCT_N: usize = 2;

/// A single number or a set of named numbers (e.g. forward/backward/harmonic).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricValue {
    Scalar(f64),
    Named(BTreeMap<String, f64>),
}

impl MetricValue {
    pub fn is_finite(&self) -> bool {
        match self {
            MetricValue::Scalar(v) => v.is_finite(),
            MetricValue::Named(m) => m.values().all(|v| v.is_finite()),
        }
    }

    pub fn scalar(&self) -> Option<f64> {
        match self {
            MetricValue::Scalar(v) => Some(*v),
            MetricValue::Named(_) => None,
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        match self {
            MetricValue::Scalar(_) => None,
            MetricValue::Named(m) => m.get(name).copied(),
        }
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub metric: String,
    pub value: MetricValue,
    pub hash: HashCode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    /// Set when the value is a convention for empty input rather than a measurement.
    #[serde(default, skip_serializing_if = "is_false")]
    pub degenerate: bool,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl MetricResult {
    pub(crate) fn new(metric: impl Into<String>, value: MetricValue, hash: HashCode) -> Result<Self> {
        let metric = metric.into();
        if !value.is_finite() {
            return Err(Error::Input(format!("{metric} produced a non-finite value")));
        }
        Ok(MetricResult {
            metric,
            value,
            hash,
            n: None,
            degenerate: false,
            extra: serde_json::Map::new(),
        })
    }

    pub(crate) fn with_n(mut self, n: usize) -> Self {
        self.n = Some(n as u32);
        self
    }
}
