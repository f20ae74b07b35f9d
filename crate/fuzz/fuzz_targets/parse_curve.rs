#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = cm2::curves::parse_curve(text) {
        let again = cm2::curves::parse_curve(&c.to_string()).expect("printed curve parses");
        assert_eq!(again, c);
    }
});
