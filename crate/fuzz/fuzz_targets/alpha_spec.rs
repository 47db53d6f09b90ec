#![no_main]

use l2dens::io::AlphaSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(AlphaSpec::Value(a)) = s.parse::<AlphaSpec>() {
            assert!(a.is_finite());
        }
    }
});
