#![no_main]

use libfuzzer_sys::fuzz_target;
use twrc::NetFn;

// A table that parses must print back to an equal table.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = text.parse::<NetFn>() {
        let again: NetFn = f.to_text().parse().expect("printed table reparses");
        assert_eq!(again, f);
    }
});
