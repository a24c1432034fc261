#![no_main]
use geneval::report::{compare_reports, EvalReport};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = EvalReport::from_json(text, "fuzz") {
        let written = report.to_json();
        let again = EvalReport::from_json(&written, "fuzz").expect("own output parses");
        assert_eq!(again.to_json(), written);
        assert!(compare_reports(&report, &again).all_comparable());
    }
});
