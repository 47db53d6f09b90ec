#![no_main]

use l2dens::zoo::lookup;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(d) = lookup(s) {
            let (lo, hi) = d.support();
            assert!(lo < hi);
            assert!(d.pdf(0.5 * (lo + hi)) >= 0.0);
        }
    }
});
