//! Checkpoint bytes may be truncated or corrupted on disk; decoding must
//! reject them without panicking or over-allocating.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = relq::net::load_checkpoint(data);
});
