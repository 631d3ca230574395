#![no_main]

use cavkerr::config::ConfigFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = ConfigFile::from_toml(text) else {
        return;
    };
    let _ = cfg.validate();
    let again = ConfigFile::from_toml(&cfg.to_toml()).expect("written config parses");
    assert_eq!(cfg, again);
});
