#![no_main]
use geneval::tokenizer::{BpeMerges, Tokenizer};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(merges) = BpeMerges::parse(text) {
        assert!(merges.len() <= text.lines().count());
        let tok = Tokenizer::bpe(merges, true);
        let pieces = tok.tokenize(text);
        let _ = tok.detokenize(&pieces);
    }
});
