#![no_main]

use libfuzzer_sys::fuzz_target;
use phylocomb::comb::{comb_from_csv, distance_matrix, tree_from_comb};

fuzz_target!(|data: &[u8]| {
    // Comb CSV; the matrix is quadratic so large combs stop at parsing.
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(c) = comb_from_csv(s, None) {
            if c.n_tips() <= 512 {
                let _ = distance_matrix(&c);
                let _ = tree_from_comb(&c, 1.0);
            }
        }
    }
});
