#![no_main]

use l2dens::io::{parse_estimator, parse_estimator_list};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(list) = parse_estimator_list(s) {
        assert!(!list.is_empty());
        for r in list {
            // Labels name the estimator they came from.
            assert_eq!(parse_estimator(&r.label()).unwrap(), r);
        }
    }
});
