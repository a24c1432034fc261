#![no_main]
use geneval::cli::MetricSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(specs) = MetricSpec::parse_list(text) {
        for s in specs {
            assert_eq!(s.to_string().parse::<MetricSpec>().unwrap(), s);
        }
    }
});
