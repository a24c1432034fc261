use std::collections::HashSet;

use super::bleu::retokenize_all;
use super::{MetricResult, MetricValue};
use crate::error::{Error, Result};
use crate::hashing::FieldHasher;

/// Distinct n-grams over total n-grams across all (standardized) sentences.
/// With no n-grams at all the value is 0.0 and `degenerate` is set.
pub fn distinct_n<S: AsRef<str> + Sync>(gen: &[Vec<S>], n: usize) -> Result<MetricResult> {
    if n == 0 {
        return Err(Error::Argument("distinct-n needs n >= 1".into()));
    }
    let toks = retokenize_all(gen);
    let mut seen: HashSet<&[String]> = HashSet::new();
    let mut total = 0usize;
    for s in &toks {
        for g in s.windows(n) {
            seen.insert(g);
            total += 1;
        }
    }
    let value = if total == 0 { 0.0 } else { seen.len() as f64 / total as f64 };
    let mut h = FieldHasher::new("distinct");
    h.uint(n as u64);
    let mut r = MetricResult::new(format!("distinct-{n}"), MetricValue::Scalar(value), h.finish())?.with_n(n);
    r.degenerate = total == 0;
    Ok(r)
}
