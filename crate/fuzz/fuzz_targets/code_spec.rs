#![no_main]

use libfuzzer_sys::fuzz_target;
use twrc::{CodeSpec, RingLinearCode};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = text.parse::<CodeSpec>() {
        for q in [2, 3, 4] {
            let _ = RingLinearCode::from_spec(spec, q);
        }
    }
});
