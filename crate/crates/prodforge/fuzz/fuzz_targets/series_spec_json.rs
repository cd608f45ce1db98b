#![no_main]

use libfuzzer_sys::fuzz_target;
use prodforge::SeriesSpec;

// Arbitrary bytes through the series-file parser: parsing must never panic,
// and anything accepted must round-trip through its own serialization.
fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 16 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = SeriesSpec::from_json_str(text) {
        let mut last = 0u64;
        for &(degree, _) in spec.coefficients() {
            assert!(degree > last, "degrees must be strictly increasing");
            last = degree;
        }
        let json = spec.to_json_string();
        let back = SeriesSpec::from_json_str(&json).expect("serialized spec must reparse");
        assert_eq!(spec, back);
    }
});
