#![no_main]

use hyperslice::stem::StemPolynomial;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = StemPolynomial::from_json(text) {
        let json = p.to_json();
        let again = StemPolynomial::from_json(&json).expect("serialized polynomial parses");
        assert_eq!(again.to_json(), json);
    }
});
