#![no_main]

use l2dens::io::BandwidthSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(BandwidthSpec::Value(h)) = s.parse::<BandwidthSpec>() {
            assert!(h > 0.0 && h.is_finite());
        }
    }
});
