#![no_main]

use hyperslice_cli::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

// No base directory, so function files are never read.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Err(e) = ExperimentConfig::parse(text, "fuzz", None) {
        let _ = e.to_string();
    }
});
