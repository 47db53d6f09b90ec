#![no_main]

use l2dens::io::{curve_csv, parse_curve_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(curve) = parse_curve_csv(text) else {
        return;
    };
    if curve.x.iter().chain(&curve.fhat).any(|v| v.is_nan()) {
        return;
    }
    let again = parse_curve_csv(&curve_csv(&curve.meta, &curve.x, &curve.fhat)).unwrap();
    assert_eq!(again.x, curve.x);
    assert_eq!(again.fhat, curve.fhat);
});
