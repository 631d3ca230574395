#![no_main]

use cavkerr::lattice::LatticeEnsemble;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(e) = LatticeEnsemble::parse(text) {
        let again = LatticeEnsemble::parse(&e.to_table().render()).expect("written table parses");
        assert_eq!(e, again);
    }
});
