#![no_main]
use geneval::metrics::parse_token_scores;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(scores) = parse_token_scores(text, "fuzz") {
        let again = parse_token_scores(&scores.to_jsonl(), "fuzz").expect("own output parses");
        assert_eq!(again, scores);
    }
});
