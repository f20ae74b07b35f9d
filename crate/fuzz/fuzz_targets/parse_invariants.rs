#![no_main]
use cm2::pipeline::{format_invariants, parse_invariants};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 8192 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(inv) = parse_invariants(text) {
        let printed = format_invariants(&inv);
        let again = parse_invariants(&printed).expect("printed invariants parse");
        assert_eq!(format_invariants(&again), printed);
    }
});
