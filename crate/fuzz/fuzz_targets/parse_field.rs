#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 4096 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(k) = cm2::cmfield::parse_field(text) {
        let printed = k.to_string();
        let again = cm2::cmfield::parse_field(&printed).expect("printed field parses");
        assert_eq!(again.to_string(), printed);
    }
});
