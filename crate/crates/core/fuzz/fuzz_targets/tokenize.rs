#![no_main]
use geneval::tokenizer::{detokenize, standard_retokenize, Tokenizer};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for lowercase in [false, true] {
        let tokens = Tokenizer::standard(lowercase).tokenize(text);
        assert!(tokens.iter().all(|t| !t.is_empty() && !t.chars().any(char::is_whitespace)));
        let once = standard_retokenize(&tokens);
        assert_eq!(standard_retokenize(&once), once);
        let _ = detokenize(&tokens);
    }
});
