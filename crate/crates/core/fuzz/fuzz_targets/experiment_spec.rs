#![no_main]

use libfuzzer_sys::fuzz_target;
use schmidt_core::cli::ExperimentSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = ExperimentSpec::from_json(s) {
        let _ = spec.parse();
    }
});
