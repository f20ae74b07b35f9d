#![no_main]
use cm2::pipeline::{format_poly_file, parse_poly_file};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_poly_file(text) {
        let again = parse_poly_file(&format_poly_file(&p)).expect("printed polynomial parses");
        assert_eq!(again, p);
    }
});
