#![no_main]

use cavkerr::io::CsvTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(t) = CsvTable::parse(text) {
        let again = CsvTable::parse(&t.render()).expect("rendered table parses");
        assert_eq!(t, again);
    }
});
