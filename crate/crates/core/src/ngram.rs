//! Interpolated Kneser–Ney n-gram language model with a fixed discount.
//!
//! The highest order uses raw counts; every lower order uses continuation
//! counts (the number of distinct left extensions of an n-gram). The unigram
//! level interpolates with a uniform distribution over the event space:
//! training tokens, `<unk>` and end-of-sentence.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tokenizer::UNK;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const DEFAULT_ORDER: usize = 5;
pub const DEFAULT_DISCOUNT: f64 = 0.75;

const BOS_ID: u32 = 0;
const UNK_ID: u32 = 1;
const EOS_ID: u32 = 2;

#[derive(Debug, Clone, Default)]
struct ContextStats {
    total: u64,
    counts: HashMap<u32, u64>,
}

impl ContextStats {
    fn add(&mut self, w: u32, n: u64) {
        self.total += n;
        *self.counts.entry(w).or_insert(0) += n;
    }
}

#[derive(Debug, Clone)]
pub struct NGramModel {
    order: usize,
    discount: f64,
    symbols: Vec<String>,
    index: HashMap<String, u32>,
    /// `levels[k]` holds statistics for n-grams of length `k + 1`, keyed by
    /// their `k`-symbol context.
    levels: Vec<HashMap<Vec<u32>, ContextStats>>,
}

pub fn train_lm<S: AsRef<str>>(sentences: &[Vec<S>], order: usize, discount: f64) -> Result<NGramModel> {
    NGramModel::train(sentences, order, discount)
}

impl NGramModel {
    pub fn train<S: AsRef<str>>(sentences: &[Vec<S>], order: usize, discount: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::Argument("n-gram order must be at least 1".into()));
        }
        if !(discount > 0.0 && discount < 1.0) {
            return Err(Error::Argument(format!("discount must lie in (0, 1), got {discount}")));
        }
        if sentences.iter().all(|s| s.is_empty()) {
            return Err(Error::Training("no non-empty training sentence".into()));
        }

        let mut symbols = vec![BOS.to_string(), UNK.to_string(), EOS.to_string()];
        let mut index: HashMap<String, u32> =
            symbols.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect();

        let mut levels: Vec<HashMap<Vec<u32>, ContextStats>> = vec![HashMap::new(); order];
        let top = &mut levels[order - 1];
        let mut padded: Vec<u32> = Vec::new();
        for sent in sentences {
            padded.clear();
            padded.resize(order - 1, BOS_ID);
            for tok in sent {
                let tok = tok.as_ref();
                let id = match index.get(tok) {
                    Some(&id) => id,
                    None => {
                        let id = symbols.len() as u32;
                        symbols.push(tok.to_string());
                        index.insert(tok.to_string(), id);
                        id
                    }
                };
                padded.push(id);
            }
            padded.push(EOS_ID);
            for i in order - 1..padded.len() {
                top.entry(padded[i + 1 - order..i].to_vec())
                    .or_default()
                    .add(padded[i], 1);
            }
        }

        // Continuation counts: each distinct (v, context, w) type at order
        // k + 1 adds one to (context, w) at order k.
        for k in (0..order - 1).rev() {
            let mut lower: HashMap<Vec<u32>, ContextStats> = HashMap::new();
            for (ctx, stats) in &levels[k + 1] {
                let shorter = &ctx[1..];
                let entry = lower.entry(shorter.to_vec()).or_default();
                for &w in stats.counts.keys() {
                    entry.add(w, 1);
                }
            }
            levels[k] = lower;
        }

        Ok(NGramModel {
            order,
            discount,
            symbols,
            index,
            levels,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    /// Number of events a distribution ranges over: training tokens, unk and eos.
    pub fn event_count(&self) -> usize {
        self.symbols.len() - 1
    }

    /// Event surface forms: every training token, `<unk>` and `</s>`.
    pub fn events(&self) -> Vec<&str> {
        self.symbols[1..].iter().map(String::as_str).collect()
    }

    fn id(&self, tok: &str) -> u32 {
        match self.index.get(tok) {
            Some(&id) if id != BOS_ID => id,
            _ => UNK_ID,
        }
    }

    fn context_id(&self, tok: &str) -> u32 {
        self.index.get(tok).copied().unwrap_or(UNK_ID)
    }

    /// Probability of `w` after `context`, interpolating orders
    /// `1..=context.len() + 1`. `context` holds at most `order - 1` ids.
    fn prob_ids(&self, context: &[u32], w: u32) -> f64 {
        let mut p = 1.0 / self.event_count() as f64;
        for k in 0..=context.len() {
            let ctx = &context[context.len() - k..];
            if let Some(stats) = self.levels[k].get(ctx) {
                if stats.total > 0 {
                    let total = stats.total as f64;
                    let c = stats.counts.get(&w).copied().unwrap_or(0) as f64;
                    let types = stats.counts.len() as f64;
                    p = (c - self.discount).max(0.0) / total + self.discount * types / total * p;
                }
            }
        }
        p
    }

    /// P(token | context) with string inputs. `<s>` in the context stands for
    /// the begin-of-sentence pad and `</s>` as token for end-of-sentence;
    /// unseen strings are scored as `<unk>`. Longer contexts are truncated to
    /// the model order.
    pub fn conditional<S: AsRef<str>>(&self, context: &[S], token: &str) -> f64 {
        let keep = context.len().min(self.order - 1);
        let ctx: Vec<u32> = context[context.len() - keep..]
            .iter()
            .map(|t| self.context_id(t.as_ref()))
            .collect();
        self.prob_ids(&ctx, self.id(token))
    }

    /// Natural-log probability of a sentence including its end-of-sentence event.
    pub fn sentence_logprob<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        let n = self.order - 1;
        let mut history: Vec<u32> = vec![BOS_ID; n];
        let mut total = 0.0;
        for w in tokens.iter().map(|t| self.id(t.as_ref())).chain(std::iter::once(EOS_ID)) {
            total += self.prob_ids(&history[history.len() - n..], w).ln();
            history.push(w);
        }
        total
    }

    /// Contexts observed at n-gram length `n` (1..=order), rendered as strings.
    pub fn contexts(&self, n: usize) -> Vec<Vec<&str>> {
        let mut out: Vec<Vec<&str>> = self.levels[n - 1]
            .keys()
            .map(|ctx| ctx.iter().map(|&id| self.symbols[id as usize].as_str()).collect())
            .collect();
        out.sort();
        out
    }

    /// Writes every count table as `context TAB token TAB count` lines,
    /// lowest order first. Lower orders hold continuation counts.
    pub fn write_counts<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for level in &self.levels {
            let mut rows: BTreeMap<(String, &str), u64> = BTreeMap::new();
            for (ctx, stats) in level {
                let ctx_s = ctx
                    .iter()
                    .map(|&id| self.symbols[id as usize].as_str())
                    .collect::<Vec<_>>()
                    .join(" ");
                for (&tok, &c) in &stats.counts {
                    rows.insert((ctx_s.clone(), self.symbols[tok as usize].as_str()), c);
                }
            }
            for ((ctx, tok), c) in rows {
                writeln!(w, "{ctx}\t{tok}\t{c}")?;
            }
        }
        Ok(())
    }
}

/// exp(−Σ log P(sentence) / Σ (tokens + 1)).
pub fn lm_perplexity<S: AsRef<str> + Sync>(model: &NGramModel, sentences: &[Vec<S>]) -> Result<f64> {
    if sentences.is_empty() {
        return Err(Error::Input("perplexity needs at least one sentence".into()));
    }
    let logprobs: Vec<f64> = sentences.par_iter().map(|s| model.sentence_logprob(s)).collect();
    let total: f64 = logprobs.iter().sum();
    let count: usize = sentences.iter().map(|s| s.len() + 1).sum();
    Ok((-total / count as f64).exp())
}
