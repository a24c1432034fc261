#![no_main]
use geneval::vocab::{parse_vocab_file, Vocab};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(lists) = parse_vocab_file(text) else { return };
    if let Ok(vocab) = Vocab::from_lists(lists, 1) {
        let written = vocab.to_file_string().expect("valid vocab serializes");
        assert_eq!(parse_vocab_file(&written).expect("own output parses"), vocab.lists());
    }
});
