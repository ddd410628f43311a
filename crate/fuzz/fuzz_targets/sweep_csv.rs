#![no_main]

use libfuzzer_sys::fuzz_target;
use twrc::harness::{parse_sweep_csv, write_sweep_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = parse_sweep_csv(text) {
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).expect("in-memory write");
        let again = parse_sweep_csv(std::str::from_utf8(&buf).unwrap()).expect("written CSV reparses");
        assert_eq!(again.len(), rows.len());
    }
});
