#![no_main]

use libfuzzer_sys::fuzz_target;
use schmidt_core::game::Transcript;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(t) = Transcript::from_json(s) {
        let back = Transcript::from_json(&t.to_json()).expect("own output parses");
        assert_eq!(back, t);
    }
});
