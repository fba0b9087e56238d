//! Covers the feature expression grammar and the feature-set file format,
//! including the nesting-depth guard.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = relq::dl::parse_feature(text);
        let _ = relq::dl::parse_feature_set(text);
    }
});
