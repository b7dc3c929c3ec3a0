#![no_main]

use libfuzzer_sys::fuzz_target;
use phylocomb::chronos::{contour_from_csv, reduced_comb, tree_from_contour};

fuzz_target!(|data: &[u8]| {
    // Contour CSV, then both consumers of a parsed path.
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(p) = contour_from_csv(s) {
            let _ = tree_from_contour(&p);
            let _ = reduced_comb(&p, 1.0);
        }
    }
});
