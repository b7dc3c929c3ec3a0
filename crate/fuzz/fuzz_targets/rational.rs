#![no_main]

use libfuzzer_sys::fuzz_target;
use phylocomb::combinatorics::parse_rational;

fuzz_target!(|data: &[u8]| {
    // Rational literals such as 1/3 or 0.25.
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_rational(s);
    }
});
