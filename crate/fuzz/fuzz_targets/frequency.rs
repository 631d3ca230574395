#![no_main]

use cavkerr::config::parse_frequency;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(hz) = parse_frequency(text) {
        assert!(hz.is_finite());
        let again = parse_frequency(&format!("{hz:?} Hz")).expect("plain hertz parses");
        assert_eq!(hz.to_bits(), again.to_bits());
    }
});
