#![no_main]

use l2dens::io::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(cfg) = RunConfig::from_toml(s) {
            cfg.validate().unwrap();
            let merged = RunConfig::default().overlay(cfg.clone());
            assert_eq!(merged, cfg);
        }
    }
});
