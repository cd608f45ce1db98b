#![no_main]

use libfuzzer_sys::fuzz_target;
use prodforge::{
    build_spf_sieve, formal_log_check, to_product, CoeffKind, CoeffTable, FactorKind, Parity,
    SeriesSpec,
};

const K: u64 = 20;

// Any accepted series must transform into a product whose formal
// re-expansion reproduces it exactly.
fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 14 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = SeriesSpec::from_json_str(text) else {
        return;
    };
    // keep the exact arithmetic small
    if spec.coefficients().len() > 6
        || spec.max_degree() > 16
        || spec
            .coefficients()
            .iter()
            .any(|(_, c)| c.numer().bits() > 48 || c.denom().bits() > 48)
    {
        return;
    }
    let sieve = build_spf_sieve(K).unwrap();
    let a = CoeffTable::closed_form(CoeffKind::ALog, K, None, &sieve).unwrap();
    let b = CoeffTable::closed_form(CoeffKind::BLog, K, None, &sieve).unwrap();

    let minus = to_product(&spec, FactorKind::Minus, K, &a).unwrap();
    assert!(formal_log_check(&minus, &spec, K).unwrap().ok);

    let plus = to_product(&spec, FactorKind::Plus, K, &b).unwrap();
    assert!(formal_log_check(&plus, &spec, K).unwrap().ok);

    if spec.parity() == Parity::OddOnly {
        let ratio = to_product(&spec, FactorKind::RatioOdd, K, &a).unwrap();
        assert!(formal_log_check(&ratio, &spec, K).unwrap().ok);
    }
});
