//! Instance files come from users and generators alike; parsing must never
//! panic, only return positioned errors.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = relq::env::parse_instance(text);
    }
});
