use super::bleu::retokenize_all;
use super::{MetricResult, MetricValue};
use crate::error::Result;
use crate::hashing::{sentences_hash, FieldHasher};
use crate::ngram::{lm_perplexity, train_lm, DEFAULT_DISCOUNT};

/// Forward perplexity scores generated text under an n-gram model of the real
/// text; reverse perplexity scores real text under a model of the generated
/// text. Both sides are standardized first.
pub fn fr_perplexity<S: AsRef<str> + Sync>(gen: &[Vec<S>], real: &[Vec<S>], order: usize) -> Result<MetricResult> {
    let gen = retokenize_all(gen);
    let real = retokenize_all(real);
    let forward = lm_perplexity(&train_lm(&real, order, DEFAULT_DISCOUNT)?, &gen)?;
    let reverse = lm_perplexity(&train_lm(&gen, order, DEFAULT_DISCOUNT)?, &real)?;
    let mut h = FieldHasher::new("fr-perplexity");
    h.hash(&sentences_hash(&real))
        .uint(order as u64)
        .uint(DEFAULT_DISCOUNT.to_bits());
    let value = MetricValue::Named(
        [("forward", forward), ("reverse", reverse)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
    );
    Ok(MetricResult::new(format!("fr-perplexity-{order}"), value, h.finish())?.with_n(order))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn symmetric_when_equal() {
        let s = vec![t("a b c"), t("b c d"), t("a a")];
        let r = fr_perplexity(&s, &s, 5).unwrap();
        assert_eq!(r.value.get("forward"), r.value.get("reverse"));
        assert!(r.value.get("forward").unwrap() >= 1.0);
    }

    #[test]
    fn unseen_generation_follows_fallback_chain() {
        // Real text "a b" under a 5-gram model. Generated "x" is unknown, so
        // P(unk | <s>^4) = d^4 * P1(unk) with P1(unk) = d * 3/3 * 1/4 (three
        // continuation types over events {a, b, unk, eos}); then eos after an
        // unseen context falls to P1(eos) = (1 - d)/3 + d/4.
        let d = DEFAULT_DISCOUNT;
        let r = fr_perplexity(&[t("x")], &[t("a b")], 5).unwrap();
        let p_unk = d.powi(4) * d / 4.0;
        let p_eos = (1.0 - d) / 3.0 + d / 4.0;
        let want = (-(p_unk.ln() + p_eos.ln()) / 2.0).exp();
        assert!((r.value.get("forward").unwrap() - want).abs() < 1e-9 * want);
    }

    #[test]
    fn hash_depends_on_real_and_order() {
        let a = fr_perplexity(&[t("a")], &[t("a b")], 5).unwrap();
        let b = fr_perplexity(&[t("c d")], &[t("A b")], 5).unwrap();
        let c = fr_perplexity(&[t("a")], &[t("a b")], 3).unwrap();
        assert_eq!(a.hash, b.hash);
        assert_ne!(a.hash, c.hash);
        assert_eq!(c.metric, "fr-perplexity-3");
    }

    #[test]
    fn empty_generation_is_training_error() {
        let empty: Vec<Vec<String>> = vec![vec![]];
        assert!(fr_perplexity(&empty, &[t("a")], 5).is_err());
    }
}
