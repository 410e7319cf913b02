#![no_main]

use hepnc::sim::SimSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = SimSpec::from_toml(text) {
        assert!(spec.symbols > 0 && spec.block_length > 0 && !spec.snr_ar_db.is_empty());
        // loading the library is bounded; the sweep itself is not run
        if spec.scheme.m1() <= 8 {
            let _ = spec.template();
        }
    }
});
