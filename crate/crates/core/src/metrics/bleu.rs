//! Corpus BLEU over standardized tokens, where n-grams containing `<unk>`
//! never match.
//!
//! Pipeline: retokenize hypotheses and references with the standard word
//! tokenizer; count clipped n-gram matches for n = 1..=max_n, skipping every
//! n-gram that contains `<unk>` on either side (hypothesis unk n-grams still
//! count toward the denominator); combine precisions by geometric mean,
//! replacing a zero match count at n >= 2 by (0 + 1) / (total + 1); apply the
//! brevity penalty with the closest reference length.

use std::collections::HashMap;

use rayon::prelude::*;

use super::{MetricResult, MetricValue};
use crate::error::{Error, Result};
use crate::hashing::{multi_sentences_hash, FieldHasher, HashCode};
use crate::tokenizer::{standard_retokenize, UNK};

/// Sufficient statistics of corpus BLEU.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: Vec<u64>,
    pub totals: Vec<u64>,
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuStats {
    pub fn new(max_n: usize) -> Self {
        BleuStats {
            matches: vec![0; max_n],
            totals: vec![0; max_n],
            hyp_len: 0,
            ref_len: 0,
        }
    }

    pub fn add(&mut self, other: &BleuStats) {
        for (a, b) in self.matches.iter_mut().zip(&other.matches) {
            *a += b;
        }
        for (a, b) in self.totals.iter_mut().zip(&other.totals) {
            *a += b;
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
    }

    pub fn score(&self) -> f64 {
        if self.hyp_len == 0 || self.matches.first().copied().unwrap_or(0) == 0 {
            return 0.0;
        }
        let max_n = self.matches.len();
        let mut log_sum = 0.0;
        for n in 0..max_n {
            let (m, t) = (self.matches[n] as f64, self.totals[n] as f64);
            let p = if n == 0 || self.matches[n] > 0 {
                m / t
            } else {
                1.0 / (t + 1.0)
            };
            log_sum += p.ln();
        }
        let (c, r) = (self.hyp_len as f64, self.ref_len as f64);
        let bp = if c < r { (1.0 - r / c).exp() } else { 1.0 };
        bp * (log_sum / max_n as f64).exp()
    }
}

/// Token ids shared by hypotheses and references; id 0 is `<unk>`.
#[derive(Default)]
pub(crate) struct Interner(HashMap<String, u32>);

impl Interner {
    pub(crate) fn new() -> Self {
        let mut map = HashMap::new();
        map.insert(UNK.to_string(), 0);
        Interner(map)
    }

    fn ids(&mut self, tokens: &[String]) -> Vec<u32> {
        tokens
            .iter()
            .map(|t| {
                let next = self.0.len() as u32;
                *self.0.entry(t.clone()).or_insert(next)
            })
            .collect()
    }
}

/// A sentence's n-gram counts with unk-bearing n-grams removed.
pub(crate) struct Prepared {
    len: usize,
    grams: Vec<HashMap<Vec<u32>, u32>>,
}

impl Prepared {
    pub(crate) fn new(tokens: &[String], max_n: usize, interner: &mut Interner) -> Self {
        let ids = interner.ids(tokens);
        let grams = (1..=max_n)
            .map(|n| {
                let mut counts = HashMap::new();
                for g in ids.windows(n) {
                    if !g.contains(&0) {
                        *counts.entry(g.to_vec()).or_insert(0) += 1;
                    }
                }
                counts
            })
            .collect();
        Prepared { len: ids.len(), grams }
    }

    /// Statistics of this sentence as a hypothesis against `refs`.
    pub(crate) fn stats_against<'a>(&self, refs: impl Iterator<Item = &'a Prepared> + Clone) -> BleuStats {
        let max_n = self.grams.len();
        let mut st = BleuStats::new(max_n);
        st.hyp_len = self.len as u64;
        st.ref_len = refs
            .clone()
            .map(|r| r.len)
            .min_by_key(|&rl| ((rl as i64 - self.len as i64).abs(), rl))
            .unwrap_or(0) as u64;
        for n in 0..max_n {
            st.totals[n] = (self.len + 1).saturating_sub(n + 1) as u64;
            st.matches[n] = self.grams[n]
                .iter()
                .map(|(g, &c)| {
                    let best = refs.clone().filter_map(|r| r.grams[n].get(g)).max().copied().unwrap_or(0);
                    c.min(best) as u64
                })
                .sum();
        }
        st
    }
}

pub(crate) fn retokenize_all<S: AsRef<str> + Sync>(sentences: &[Vec<S>]) -> Vec<Vec<String>> {
    sentences.par_iter().map(|s| standard_retokenize(s)).collect()
}

pub(crate) fn bleu_refs_hash(refs: &[Vec<Vec<String>>]) -> HashCode {
    let mut h = FieldHasher::new("bleu");
    h.hash(&multi_sentences_hash(refs));
    h.finish()
}

/// Corpus BLEU with one or more references per hypothesis. The hash covers
/// the standardized references only.
pub fn bleu<S: AsRef<str> + Sync>(
    hyps: &[Vec<S>],
    refs: &[Vec<Vec<S>>],
    max_n: usize,
) -> Result<MetricResult> {
    if hyps.is_empty() {
        return Err(Error::Argument("BLEU needs at least one hypothesis".into()));
    }
    if hyps.len() != refs.len() {
        return Err(Error::Argument(format!(
            "{} hypotheses but {} reference groups",
            hyps.len(),
            refs.len()
        )));
    }
    if max_n == 0 {
        return Err(Error::Argument("BLEU n must be at least 1".into()));
    }
    if let Some(i) = refs.iter().position(Vec::is_empty) {
        return Err(Error::Argument(format!("hypothesis {i} has no reference")));
    }
    let hyps = retokenize_all(hyps);
    let refs: Vec<Vec<Vec<String>>> = refs.par_iter().map(|g| retokenize_all(g)).collect();

    let mut interner = Interner::new();
    let hyp_p: Vec<Prepared> = hyps.iter().map(|h| Prepared::new(h, max_n, &mut interner)).collect();
    let ref_p: Vec<Vec<Prepared>> = refs
        .iter()
        .map(|g| g.iter().map(|r| Prepared::new(r, max_n, &mut interner)).collect())
        .collect();
    let per: Vec<BleuStats> = hyp_p
        .par_iter()
        .zip(&ref_p)
        .map(|(h, g)| h.stats_against(g.iter()))
        .collect();
    let mut total = BleuStats::new(max_n);
    for s in &per {
        total.add(s);
    }
    Ok(MetricResult::new(format!("bleu-{max_n}"), MetricValue::Scalar(total.score()), bleu_refs_hash(&refs))?.with_n(max_n))
}

/// [`bleu`] with exactly one reference per hypothesis.
pub fn bleu_single<S: AsRef<str> + Sync + Clone>(
    hyps: &[Vec<S>],
    refs: &[Vec<S>],
    max_n: usize,
) -> Result<MetricResult> {
    let groups: Vec<Vec<Vec<S>>> = refs.iter().map(|r| vec![r.clone()]).collect();
    bleu(hyps, &groups, max_n)
}
