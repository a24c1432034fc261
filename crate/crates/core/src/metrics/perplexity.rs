//! Perplexity over F ∪ R. The model's unk probability is spread evenly over
//! the rare vocabulary, so models trained with different frequent
//! vocabularies stay comparable while F ∪ R is fixed.

use std::collections::HashMap;

use super::{MetricResult, MetricValue, SentenceScores, TokenScores};
use crate::corpus::{TokenizedCorpus, TEST, TRAIN};
use crate::error::{Error, Result};
use crate::hashing::{sentences_hash, FieldHasher, HashCode};
use crate::tokenizer::UNK;
use crate::vocab::{IdMode, Vocab};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Variant {
    /// Rare tokens score log(p(unk) / |R|).
    UnkSpread,
    /// Rare tokens score log p(unk), as if unk were an ordinary word.
    Original,
}

fn check_alignment<S: AsRef<str>>(refs: &[Vec<S>], scores: &TokenScores) -> Result<()> {
    if refs.len() != scores.sentences.len() {
        return Err(Error::Input(format!(
            "{} reference sentences but {} scored sentences",
            refs.len(),
            scores.sentences.len()
        )));
    }
    for (i, (r, s)) in refs.iter().zip(&scores.sentences).enumerate() {
        let same = r.len() == s.tokens.len() && r.iter().zip(&s.tokens).all(|(a, b)| a.as_ref() == b);
        if !same {
            return Err(Error::Input(format!("scored sentence {i} does not match its reference")));
        }
        s.validate()
            .map_err(|m| Error::Input(format!("scored sentence {i}: {m}")))?;
    }
    Ok(())
}

fn position_logprob(
    s: &SentenceScores,
    j: usize,
    vocab: &Vocab,
    variant: Variant,
    sentence: usize,
) -> Result<f64> {
    if j == s.tokens.len() {
        return Ok(s.lp_token[j].expect("validated"));
    }
    let w = s.tokens[j].as_str();
    if vocab.is_frequent(w) {
        s.lp_token[j].ok_or_else(|| {
            Error::Input(format!(
                "scored sentence {sentence}: frequent token {w:?} at position {j} has no lp_token"
            ))
        })
    } else if vocab.is_rare(w) {
        Ok(match variant {
            Variant::UnkSpread => s.lp_unk[j] - (vocab.rare().len() as f64).ln(),
            Variant::Original => s.lp_unk[j],
        })
    } else if w == UNK {
        Ok(s.lp_unk[j])
    } else {
        Err(Error::Input(format!(
            "scored sentence {sentence}: token {w:?} is outside F ∪ R"
        )))
    }
}

fn perplexity_value<S: AsRef<str>>(
    refs: &[Vec<S>],
    scores: &TokenScores,
    vocab: &Vocab,
    variant: Variant,
) -> Result<f64> {
    check_alignment(refs, scores)?;
    let mut total = 0.0;
    let mut count = 0usize;
    for (i, s) in scores.sentences.iter().enumerate() {
        for j in 0..=s.tokens.len() {
            total += position_logprob(s, j, vocab, variant, i)?;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Input("no reference sentences to score".into()));
    }
    Ok((-total / count as f64).exp())
}

/// Hash over the reference sentences and the set F ∪ R. Moving the F/R
/// boundary leaves it unchanged.
fn union_hash<S: AsRef<str> + Sync>(refs: &[Vec<S>], vocab: &Vocab) -> HashCode {
    let mut h = FieldHasher::new("perplexity");
    h.hash(&sentences_hash(refs));
    let union = vocab.union_sorted();
    h.uint(union.len() as u64);
    for t in union {
        h.field(t.as_bytes());
    }
    h.finish()
}

/// Unk-aware perplexity: `t = log p(w)` for `w ∈ F`,
/// `t = log(p(unk) / |R|)` for `w ∈ R`, averaged over every token and the
/// final end-of-sentence of each reference.
pub fn perplexity<S: AsRef<str> + Sync>(
    refs: &[Vec<S>],
    scores: &TokenScores,
    vocab: &Vocab,
) -> Result<MetricResult> {
    let value = perplexity_value(refs, scores, vocab, Variant::UnkSpread)?;
    MetricResult::new("perplexity", MetricValue::Scalar(value), union_hash(refs, vocab))
}

/// Perplexity that treats unk as an ordinary word. Only comparable under an
/// identical F, which its hash encodes.
pub fn original_perplexity<S: AsRef<str> + Sync>(
    refs: &[Vec<S>],
    scores: &TokenScores,
    vocab: &Vocab,
) -> Result<MetricResult> {
    let value = perplexity_value(refs, scores, vocab, Variant::Original)?;
    let mut h = FieldHasher::new("perplexity-original");
    h.hash(&sentences_hash(refs));
    for list in [vocab.frequent(), vocab.rare()] {
        h.uint(list.len() as u64);
        for t in list {
            h.field(t.as_bytes());
        }
    }
    MetricResult::new("perplexity-original", MetricValue::Scalar(value), h.finish())
}

/// Token scores for the test targets under an add-one unigram model over
/// F ∪ {unk, eos} estimated from the training split. A stand-in for an
/// external generator in smoke tests and demos.
pub fn unigram_baseline_scores(corpus: &TokenizedCorpus, vocab: &Vocab) -> TokenScores {
    let mut counts: HashMap<u32, f64> = HashMap::new();
    for sample in corpus.split(TRAIN) {
        for sent in sample.sentences() {
            for id in vocab.to_ids(sent, IdMode::Train) {
                *counts.entry(id).or_insert(0.0) += 1.0;
            }
            *counts.entry(vocab.eos_id()).or_insert(0.0) += 1.0;
        }
    }
    // events: F, unk, eos
    let events = vocab.frequent().len() as f64 + 2.0;
    let total: f64 = counts.values().sum::<f64>() + events;
    let lp = |id: u32| ((counts.get(&id).copied().unwrap_or(0.0) + 1.0) / total).ln();
    let lp_unk = lp(vocab.unk_id());
    let sentences = corpus
        .targets(TEST)
        .into_iter()
        .map(|tokens| {
            let mut lp_token: Vec<Option<f64>> = tokens
                .iter()
                .map(|t| vocab.is_frequent(t).then(|| lp(vocab.id(t).expect("frequent"))))
                .collect();
            lp_token.push(Some(lp(vocab.eos_id())));
            let n = tokens.len() + 1;
            SentenceScores {
                tokens,
                lp_token,
                lp_unk: vec![lp_unk; n],
            }
        })
        .collect();
    TokenScores { sentences }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::VocabLists;

    fn vocab(f: &[&str], r: &[&str]) -> Vocab {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect();
        Vocab::from_lists(VocabLists { frequent: s(f), rare: s(r) }, 1).unwrap()
    }

    fn scored(tokens: &[&str], lp_token: Vec<Option<f64>>, lp_unk: Vec<f64>) -> SentenceScores {
        SentenceScores {
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
            lp_token,
            lp_unk,
        }
    }

    fn refs_of(s: &TokenScores) -> Vec<Vec<String>> {
        s.sentences.iter().map(|x| x.tokens.clone()).collect()
    }

    #[test]
    fn uniform_model_gives_f_plus_one() {
        let v = vocab(&["a", "b", "c"], &[]);
        let lp = (1.0f64 / 4.0).ln();
        let s = TokenScores {
            sentences: vec![
                scored(&["a", "b"], vec![Some(lp); 3], vec![lp; 3]),
                scored(&["c"], vec![Some(lp); 2], vec![lp; 2]),
            ],
        };
        let r = perplexity(&refs_of(&s), &s, &v).unwrap();
        assert!((r.value.scalar().unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn rare_token_divides_unk_mass() {
        // p(unk) = 0.2, |R| = 4 -> t = log 0.05; eos scored at probability 1
        let v = vocab(&["a"], &["w", "x", "y", "z"]);
        let s = TokenScores {
            sentences: vec![scored(&["w"], vec![None, Some(0.0)], vec![0.2f64.ln(), -1.0])],
        };
        let r = perplexity(&refs_of(&s), &s, &v).unwrap();
        // two positions: exp(-(log 0.05 + 0) / 2) = sqrt(20)
        assert!((r.value.scalar().unwrap() - 20f64.sqrt()).abs() < 1e-12);
        let o = original_perplexity(&refs_of(&s), &s, &v).unwrap();
        assert!((o.value.scalar().unwrap() - 5f64.sqrt()).abs() < 1e-12);
    }

    /// A context-free true distribution over five tokens plus eos, uniform on
    /// the tokens that end up rare. Model A only knows F_A and lumps the rest
    /// into unk. Both chain products are computed by brute force.
    #[test]
    fn folding_rare_mass_into_unk_keeps_perplexity() {
        let truth: [(&str, f64); 6] = [("a", 0.3), ("b", 0.2), ("c", 0.1), ("d", 0.1), ("e", 0.1), ("</s>", 0.2)];
        let p = |w: &str| truth.iter().find(|x| x.0 == w).unwrap().1;
        let refs = [vec!["a", "c", "d"], vec!["e"], vec!["b", "b", "c"]];

        let mut full_log = 0.0;
        let mut n = 0.0;
        for r in &refs {
            for w in r.iter().chain(std::iter::once(&"</s>")) {
                full_log += p(w).ln();
                n += 1.0;
            }
        }
        let full_ppl = (-full_log / n).exp();

        for (f, rare) in [(vec!["a", "b", "c", "d", "e"], vec![]), (vec!["a", "b"], vec!["c", "d", "e"]), (vec!["a", "b", "c"], vec!["d", "e"])] {
            let v = vocab(&f, &rare);
            let p_unk: f64 = rare.iter().map(|w| p(w)).sum::<f64>();
            let sentences = refs
                .iter()
                .map(|r| {
                    let mut lp_token: Vec<Option<f64>> =
                        r.iter().map(|w| f.contains(w).then(|| p(w).ln())).collect();
                    lp_token.push(Some(p("</s>").ln()));
                    let unk = if p_unk > 0.0 { p_unk.ln() } else { -50.0 };
                    scored(r, lp_token, vec![unk; r.len() + 1])
                })
                .collect();
            let s = TokenScores { sentences };
            let got = perplexity(&refs_of(&s), &s, &v).unwrap().value.scalar().unwrap();
            assert!((got - full_ppl).abs() < 1e-9, "F={f:?}: {got} vs {full_ppl}");
        }
    }

    #[test]
    fn hash_tracks_union_not_partition() {
        let s = TokenScores {
            sentences: vec![scored(&["a", "b"], vec![Some(-1.0), Some(-1.0), Some(-1.0)], vec![-2.0; 3])],
        };
        let refs = refs_of(&s);
        let h1 = perplexity(&refs, &s, &vocab(&["a", "b"], &[])).unwrap().hash;
        let h2 = perplexity(&refs, &s, &vocab(&["a"], &["b"])).unwrap().hash;
        let h3 = perplexity(&refs, &s, &vocab(&["a"], &["b", "z"])).unwrap().hash;
        assert_eq!(h1, h2);
        assert_ne!(h1, h3);
        let o1 = original_perplexity(&refs, &s, &vocab(&["a", "b"], &[])).unwrap().hash;
        let o2 = original_perplexity(&refs, &s, &vocab(&["a"], &["b"])).unwrap().hash;
        assert_ne!(o1, o2);
    }

    #[test]
    fn misaligned_scores_name_sentence() {
        let v = vocab(&["a", "b"], &[]);
        let s = TokenScores {
            sentences: vec![
                scored(&["a"], vec![Some(-1.0); 2], vec![-1.0; 2]),
                scored(&["a"], vec![Some(-1.0); 2], vec![-1.0; 2]),
            ],
        };
        let refs = vec![vec!["a"], vec!["b"]];
        let err = perplexity(&refs, &s, &v).unwrap_err();
        assert!(err.to_string().contains("sentence 1"), "{err}");
        let err = perplexity(&refs[..1], &s, &v).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }

    #[test]
    fn frequent_token_without_score_is_error() {
        let v = vocab(&["a"], &[]);
        let s = TokenScores { sentences: vec![scored(&["a"], vec![None, Some(-1.0)], vec![-1.0; 2])] };
        assert!(perplexity(&refs_of(&s), &s, &v).is_err());
    }

    #[test]
    fn out_of_vocabulary_reference_is_error() {
        let v = vocab(&["a"], &[]);
        let s = TokenScores { sentences: vec![scored(&["q"], vec![None, Some(-1.0)], vec![-1.0; 2])] };
        assert!(perplexity(&refs_of(&s), &s, &v).is_err());
    }
}
