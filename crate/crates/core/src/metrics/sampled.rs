//! BLEU-based diversity and quality metrics over sampled sentence sets:
//! self-BLEU and forward/backward/harmonic BLEU.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::bleu::{retokenize_all, Interner, Prepared};
use super::{MetricResult, MetricValue, DEFAULT_BLEU_N, DEFAULT_SAMPLE_SIZE};
use crate::error::{Error, Result};
use crate::hashing::{sentences_hash, FieldHasher};

/// Sorted indices of `min(k, len)` positions drawn without replacement.
pub fn sample_indices(len: usize, k: usize, seed: u64) -> Vec<usize> {
    if k >= len {
        return (0..len).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, len, k).into_vec();
    idx.sort_unstable();
    idx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelfBleuConfig {
    pub max_n: usize,
    pub sample_size: usize,
    pub seed: u64,
}

impl Default for SelfBleuConfig {
    fn default() -> Self {
        SelfBleuConfig {
            max_n: DEFAULT_BLEU_N,
            sample_size: DEFAULT_SAMPLE_SIZE,
            seed: 0,
        }
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean BLEU of each sampled generated sentence against all other sampled
/// sentences. Lower means more diverse.
pub fn self_bleu<S: AsRef<str> + Sync>(gen: &[Vec<S>], cfg: SelfBleuConfig) -> Result<MetricResult> {
    if cfg.max_n == 0 {
        return Err(Error::Argument("BLEU n must be at least 1".into()));
    }
    let picked = sample_indices(gen.len(), cfg.sample_size, cfg.seed);
    if picked.len() < 2 {
        return Err(Error::Argument(
            "self-BLEU needs at least two sampled sentences".into(),
        ));
    }
    let chosen: Vec<&Vec<S>> = picked.iter().map(|&i| &gen[i]).collect();
    let toks = retokenize_all(&chosen.iter().map(|s| s.iter().map(|t| t.as_ref()).collect()).collect::<Vec<Vec<&str>>>());
    let mut interner = Interner::new();
    let prepared: Vec<Prepared> = toks.iter().map(|s| Prepared::new(s, cfg.max_n, &mut interner)).collect();
    let scores: Vec<f64> = (0..prepared.len())
        .into_par_iter()
        .map(|i| {
            let others = prepared.iter().enumerate().filter(move |&(j, _)| j != i).map(|(_, p)| p);
            prepared[i].stats_against(others).score()
        })
        .collect();
    let mut h = FieldHasher::new("self-bleu");
    h.uint(cfg.sample_size as u64).uint(cfg.seed);
    Ok(MetricResult::new(
        format!("self-bleu-{}", cfg.max_n),
        MetricValue::Scalar(mean(&scores)),
        h.finish(),
    )?
    .with_n(cfg.max_n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FbhConfig {
    pub max_n: usize,
    /// Generated sentences sampled as hypotheses (forward) and references (backward).
    pub gen_sample_size: usize,
    /// Test sentences sampled as references (forward) and hypotheses (backward).
    pub ref_sample_size: usize,
    pub seed: u64,
}

impl Default for FbhConfig {
    fn default() -> Self {
        FbhConfig {
            max_n: DEFAULT_BLEU_N,
            gen_sample_size: DEFAULT_SAMPLE_SIZE,
            ref_sample_size: DEFAULT_SAMPLE_SIZE,
            seed: 0,
        }
    }
}

fn mean_bleu(hyps: &[Prepared], refs: &[Prepared]) -> f64 {
    let scores: Vec<f64> = hyps.par_iter().map(|h| h.stats_against(refs.iter()).score()).collect();
    mean(&scores)
}

/// Forward BLEU (generated vs test, fluency), backward BLEU (test vs
/// generated, diversity) and their harmonic mean.
pub fn fbh_bleu<S: AsRef<str> + Sync>(
    gen: &[Vec<S>],
    test_refs: &[Vec<S>],
    cfg: FbhConfig,
) -> Result<MetricResult> {
    if cfg.max_n == 0 {
        return Err(Error::Argument("BLEU n must be at least 1".into()));
    }
    if gen.is_empty() || test_refs.is_empty() {
        return Err(Error::Argument(
            "forward/backward BLEU needs generated and test sentences".into(),
        ));
    }
    let gen_tok = retokenize_all(gen);
    let ref_tok = retokenize_all(test_refs);
    let gen_idx = sample_indices(gen_tok.len(), cfg.gen_sample_size, cfg.seed);
    let ref_idx = sample_indices(ref_tok.len(), cfg.ref_sample_size, cfg.seed);

    let mut interner = Interner::new();
    let gen_p: Vec<Prepared> = gen_idx.iter().map(|&i| Prepared::new(&gen_tok[i], cfg.max_n, &mut interner)).collect();
    let ref_p: Vec<Prepared> = ref_idx.iter().map(|&i| Prepared::new(&ref_tok[i], cfg.max_n, &mut interner)).collect();

    let forward = mean_bleu(&gen_p, &ref_p);
    let backward = mean_bleu(&ref_p, &gen_p);
    let harmonic = if forward + backward > 0.0 {
        2.0 * forward * backward / (forward + backward)
    } else {
        0.0
    };

    let mut h = FieldHasher::new("fbh-bleu");
    h.hash(&sentences_hash(&ref_tok))
        .uint(cfg.gen_sample_size as u64)
        .uint(cfg.ref_sample_size as u64)
        .uint(cfg.seed);
    let value = MetricValue::Named(
        [("forward", forward), ("backward", backward), ("harmonic", harmonic)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
    );
    Ok(MetricResult::new(format!("fbh-bleu-{}", cfg.max_n), value, h.finish())?.with_n(cfg.max_n))
}
