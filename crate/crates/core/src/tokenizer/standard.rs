//! Rule-based word tokenizer: whitespace split, then punctuation/symbol runs
//! separated from word runs.

use unicode_general_category::{get_general_category, GeneralCategory as Gc};
use unicode_normalization::UnicodeNormalization;

use super::UNK;

/// True for characters in the Unicode punctuation (P*) and symbol (S*) categories.
pub fn is_punct(c: char) -> bool {
    matches!(
        get_general_category(c),
        Gc::ConnectorPunctuation
            | Gc::DashPunctuation
            | Gc::OpenPunctuation
            | Gc::ClosePunctuation
            | Gc::InitialPunctuation
            | Gc::FinalPunctuation
            | Gc::OtherPunctuation
            | Gc::MathSymbol
            | Gc::CurrencySymbol
            | Gc::ModifierSymbol
            | Gc::OtherSymbol
    )
}

/// NFC, optionally lowercased (and re-composed, since lowercasing can
/// leave decomposed sequences behind).
pub(crate) fn normalize(text: &str, lowercase: bool) -> String {
    let nfc: String = text.nfc().collect();
    if lowercase {
        nfc.to_lowercase().nfc().collect()
    } else {
        nfc
    }
}

pub(crate) fn tokenize(text: &str, lowercase: bool) -> Vec<String> {
    let text = normalize(text, lowercase);
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        split_chunk(chunk, &mut out);
    }
    out
}

/// Splits a whitespace-free chunk into maximal runs of one character class,
/// keeping every literal `<unk>` as a single token.
fn split_chunk(chunk: &str, out: &mut Vec<String>) {
    let mut run_start = 0;
    let mut run_punct: Option<bool> = None;
    let mut iter = chunk.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if chunk[i..].starts_with(UNK) {
            if run_start < i {
                out.push(chunk[run_start..i].to_string());
            }
            out.push(UNK.to_string());
            let end = i + UNK.len();
            while iter.peek().is_some_and(|&(j, _)| j < end) {
                iter.next();
            }
            run_start = end;
            run_punct = None;
            continue;
        }
        let punct = is_punct(c);
        match run_punct {
            Some(prev) if prev != punct => {
                out.push(chunk[run_start..i].to_string());
                run_start = i;
            }
            _ => {}
        }
        run_punct = Some(punct);
    }
    if run_start < chunk.len() {
        out.push(chunk[run_start..].to_string());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s, true)
    }

    #[test]
    fn splits_trailing_question_mark() {
        assert_eq!(toks("How is the weather?"), ["how", "is", "the", "weather", "?"]);
    }

    #[test]
    fn apostrophe_is_its_own_run() {
        assert_eq!(toks("don't stop"), ["don", "'", "t", "stop"]);
    }

    #[test]
    fn punctuation_runs_stay_together() {
        assert_eq!(toks("wow?! ok..."), ["wow", "?!", "ok", "..."]);
    }

    #[test]
    fn unk_is_atomic() {
        assert_eq!(toks("a<unk>b"), ["a", "<unk>", "b"]);
        assert_eq!(toks("<<unk>>"), ["<", "<unk>", ">"]);
        assert_eq!(toks("<unk><unk>"), ["<unk>", "<unk>"]);
        assert_eq!(toks("<unk"), ["<", "unk"]);
    }

    #[test]
    fn uppercase_unk_only_atomic_when_lowercasing() {
        assert_eq!(tokenize("<UNK>", true), ["<unk>"]);
        assert_eq!(tokenize("<UNK>", false), ["<", "UNK", ">"]);
    }

    #[test]
    fn nfc_composes_accents() {
        // "e" + combining acute becomes a single precomposed character
        assert_eq!(toks("cafe\u{301}"), ["caf\u{e9}"]);
    }

    #[test]
    fn unicode_whitespace_separates() {
        assert_eq!(toks("a\u{3000}b\u{a0}c"), ["a", "b", "c"]);
    }

    #[test]
    fn symbols_count_as_punctuation() {
        assert_eq!(toks("5$ +x"), ["5", "$", "+", "x"]);
    }
}
