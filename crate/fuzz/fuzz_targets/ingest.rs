#![no_main]

use l2dens::io::ingest_str;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(values) = ingest_str(text) {
        assert!(values.iter().all(|v| v.is_finite()));
        // Whatever was accepted must survive a write and re-read unchanged.
        let written: String = values.iter().map(|v| format!("{v}\n")).collect();
        assert_eq!(ingest_str(&written).unwrap(), values);
    }
});
