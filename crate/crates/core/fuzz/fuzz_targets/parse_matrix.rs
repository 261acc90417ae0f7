#![no_main]

use libfuzzer_sys::fuzz_target;
use schmidt_core::linear_forms::{parse_entry, LinearFormsMatrix};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let _ = parse_entry(s);
    let _ = LinearFormsMatrix::from_json(s);
});
