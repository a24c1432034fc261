#![no_main]
use geneval::corpus::{parse_split, Task};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&selector, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let task = match selector % 3 {
        0 => Task::Gen,
        1 => Task::SingleTurn,
        _ => Task::MultiTurn,
    };
    if let Ok(samples) = parse_split(text, task, "fuzz") {
        for s in &samples {
            assert!(s.sentences().iter().all(|t| !t.trim().is_empty()));
        }
    }
});
