//! Frequent/rare vocabulary split with a deterministic token-id bijection.
//!
//! Ids: specials `<pad> <unk> <go> <eos>` take 0..=3, then the frequent list
//! F, then the rare list R. Models are trained on F only; evaluation runs
//! over F ∪ R.

use std::collections::{BTreeSet, HashMap};

use crate::corpus::{TokenizedCorpus, TEST, TRAIN};
use crate::error::{Error, Result};
use crate::tokenizer::UNK;

pub const PAD: &str = "<pad>";
pub const GO: &str = "<go>";
pub const EOS: &str = "<eos>";
pub const SPECIALS: [&str; 4] = [PAD, UNK, GO, EOS];

const PAD_ID: u32 = 0;
const UNK_ID: u32 = 1;
const GO_ID: u32 = 2;
const EOS_ID: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdMode {
    /// Tokens outside F map to unk.
    Train,
    /// Tokens of F and R keep their ids; anything else maps to unk.
    Test,
}

#[derive(Debug, Clone)]
pub struct Vocab {
    frequent: Vec<String>,
    rare: Vec<String>,
    t_min: usize,
    index: HashMap<String, u32>,
}

impl PartialEq for Vocab {
    fn eq(&self, other: &Self) -> bool {
        self.frequent == other.frequent && self.rare == other.rare && self.t_min == other.t_min
    }
}

impl Eq for Vocab {}

/// The two token lists of a vocabulary file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VocabLists {
    pub frequent: Vec<String>,
    pub rare: Vec<String>,
}

impl Vocab {
    /// F = train tokens seen at least `t_min` times; R = every other token of
    /// train ∪ test. Both ordered by descending train count, then bytewise.
    /// Dev is not consulted.
    pub fn build(corpus: &TokenizedCorpus, t_min: usize) -> Result<Vocab> {
        if t_min == 0 {
            return Err(Error::Argument("t_min must be at least 1".into()));
        }
        for required in [TRAIN, TEST] {
            if !corpus.splits.contains_key(required) {
                return Err(Error::Input(format!("corpus has no {required:?} split")));
            }
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for sample in corpus.split(TRAIN) {
            for sent in sample.sentences() {
                for tok in sent {
                    if !SPECIALS.contains(&tok.as_str()) {
                        *counts.entry(tok.as_str()).or_insert(0) += 1;
                    }
                }
            }
        }
        for sample in corpus.split(TEST) {
            for sent in sample.sentences() {
                for tok in sent {
                    if !SPECIALS.contains(&tok.as_str()) {
                        counts.entry(tok.as_str()).or_insert(0);
                    }
                }
            }
        }
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let (frequent, rare): (Vec<_>, Vec<_>) = ranked.into_iter().partition(|&(_, c)| c >= t_min);
        Vocab::from_lists(
            VocabLists {
                frequent: frequent.into_iter().map(|(t, _)| t.to_string()).collect(),
                rare: rare.into_iter().map(|(t, _)| t.to_string()).collect(),
            },
            t_min,
        )
    }

    /// Assembles a vocabulary from explicit lists, checking that F, R and the
    /// specials are pairwise disjoint and duplicate-free.
    pub fn from_lists(lists: VocabLists, t_min: usize) -> Result<Vocab> {
        if t_min == 0 {
            return Err(Error::Argument("t_min must be at least 1".into()));
        }
        let mut index = HashMap::with_capacity(SPECIALS.len() + lists.frequent.len() + lists.rare.len());
        let all = SPECIALS
            .iter()
            .copied()
            .chain(lists.frequent.iter().map(String::as_str))
            .chain(lists.rare.iter().map(String::as_str));
        for (id, tok) in all.enumerate() {
            if tok.is_empty() {
                return Err(Error::Input("empty token in vocabulary".into()));
            }
            if index.insert(tok.to_string(), id as u32).is_some() {
                return Err(Error::Input(format!(
                    "token {tok:?} occurs more than once across specials, F and R"
                )));
            }
        }
        Ok(Vocab {
            frequent: lists.frequent,
            rare: lists.rare,
            t_min,
            index,
        })
    }

    pub fn frequent(&self) -> &[String] {
        &self.frequent
    }

    pub fn rare(&self) -> &[String] {
        &self.rare
    }

    pub fn t_min(&self) -> usize {
        self.t_min
    }

    pub fn specials(&self) -> [&'static str; 4] {
        SPECIALS
    }

    pub fn pad_id(&self) -> u32 {
        PAD_ID
    }

    pub fn unk_id(&self) -> u32 {
        UNK_ID
    }

    pub fn go_id(&self) -> u32 {
        GO_ID
    }

    pub fn eos_id(&self) -> u32 {
        EOS_ID
    }

    /// Total number of ids (specials + F + R).
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequent.is_empty() && self.rare.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    fn first_rare_id(&self) -> u32 {
        (SPECIALS.len() + self.frequent.len()) as u32
    }

    pub fn is_frequent(&self, token: &str) -> bool {
        self.id(token)
            .is_some_and(|id| id >= SPECIALS.len() as u32 && id < self.first_rare_id())
    }

    pub fn is_rare(&self, token: &str) -> bool {
        self.id(token).is_some_and(|id| id >= self.first_rare_id())
    }

    pub fn is_special(&self, token: &str) -> bool {
        SPECIALS.contains(&token)
    }

    pub fn to_ids<S: AsRef<str>>(&self, tokens: &[S], mode: IdMode) -> Vec<u32> {
        let limit = match mode {
            IdMode::Train => self.first_rare_id(),
            IdMode::Test => u32::MAX,
        };
        tokens
            .iter()
            .map(|t| match self.id(t.as_ref()) {
                Some(id) if id < limit => id,
                _ => UNK_ID,
            })
            .collect()
    }

    pub fn to_tokens(&self, ids: &[u32]) -> Result<Vec<String>> {
        ids.iter()
            .map(|&id| {
                self.token(id)
                    .map(str::to_string)
                    .ok_or_else(|| Error::Argument(format!("id {id} out of range 0..{}", self.len())))
            })
            .collect()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        let id = id as usize;
        let nf = self.frequent.len();
        if id < SPECIALS.len() {
            Some(SPECIALS[id])
        } else if id < SPECIALS.len() + nf {
            Some(&self.frequent[id - SPECIALS.len()])
        } else {
            self.rare.get(id - SPECIALS.len() - nf).map(String::as_str)
        }
    }

    /// F ∪ R as a bytewise-sorted set.
    pub fn union_sorted(&self) -> Vec<&str> {
        self.frequent
            .iter()
            .chain(&self.rare)
            .map(String::as_str)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn lists(&self) -> VocabLists {
        VocabLists {
            frequent: self.frequent.clone(),
            rare: self.rare.clone(),
        }
    }

    /// Vocabulary file text: a `#F` header, one frequent token per line, a
    /// `#R` header, one rare token per line.
    pub fn to_file_string(&self) -> Result<String> {
        let mut out = String::from("#F\n");
        for (section, tokens) in [("#R\n", &self.frequent), ("", &self.rare)] {
            for tok in tokens {
                if tok == "#F" || tok == "#R" || tok.contains(['\n', '\r']) {
                    return Err(Error::Input(format!(
                        "token {tok:?} cannot be written to a vocabulary file"
                    )));
                }
                out.push_str(tok);
                out.push('\n');
            }
            out.push_str(section);
        }
        Ok(out)
    }
}

/// Parses vocabulary file text produced by [`Vocab::to_file_string`].
pub fn parse_vocab_file(text: &str) -> Result<VocabLists> {
    let body = text
        .strip_suffix('\n')
        .ok_or_else(|| Error::parse("vocab", "file must end with a newline"))?;
    let mut lines = body.split('\n').enumerate();
    match lines.next() {
        Some((_, "#F")) => {}
        _ => return Err(Error::parse("vocab:1", "expected #F header")),
    }
    let mut lists = VocabLists::default();
    let mut in_rare = false;
    for (idx, line) in lines {
        let at = format!("vocab:{}", idx + 1);
        match line {
            "#R" if !in_rare => in_rare = true,
            "#R" | "#F" => return Err(Error::parse(at, "unexpected section header")),
            "" => return Err(Error::parse(at, "empty token")),
            tok if tok.contains('\r') => return Err(Error::parse(at, "carriage return in token")),
            tok if in_rare => lists.rare.push(tok.to_string()),
            tok => lists.frequent.push(tok.to_string()),
        }
    }
    if !in_rare {
        return Err(Error::parse("vocab", "missing #R header"));
    }
    Ok(lists)
}
