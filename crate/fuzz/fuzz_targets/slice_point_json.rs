#![no_main]

use hyperslice::slice::SlicePoint;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(x) = SlicePoint::from_json(text) {
        let json = x.to_json();
        let again = SlicePoint::from_json(&json).expect("serialized point parses");
        assert_eq!(again.to_json(), json);
    }
});
