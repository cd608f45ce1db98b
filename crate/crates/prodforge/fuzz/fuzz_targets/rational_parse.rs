#![no_main]

use libfuzzer_sys::fuzz_target;
use prodforge::arith::{format_rational, parse_rational};

// "num/den" strings: no panics, and accepted values round-trip through the
// canonical rendering.
fuzz_target!(|data: &[u8]| {
    if data.len() > 4096 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(value) = parse_rational(text) {
        let rendered = format_rational(&value);
        let back = parse_rational(&rendered).expect("canonical form must reparse");
        assert_eq!(value, back);
        // stored denominators are positive
        assert!(!rendered.contains("/-"));
    }
});
