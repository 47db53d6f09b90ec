#![no_main]

use l2dens::io::GridSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = s.parse::<GridSpec>() {
        assert!(g.max > g.min && g.count >= 2);
        // Keep the allocation small enough for the fuzzer's memory limit.
        if g.count <= 100_000 {
            let points = g.points();
            assert_eq!(points.len(), g.count);
            assert_eq!(points[0], g.min);
        }
    }
});
