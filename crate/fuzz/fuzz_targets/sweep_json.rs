#![no_main]

use libfuzzer_sys::fuzz_target;
use twrc::harness::SweepReport;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = SweepReport::from_json(text) {
        let _ = report.to_json();
    }
});
