#![no_main]

use libfuzzer_sys::fuzz_target;
use phylocomb::chronos::{contour, tree_from_json};

fuzz_target!(|data: &[u8]| {
    // Chronological tree JSON, then the contour walk.
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(t) = tree_from_json(s) {
            let _ = contour(&t);
        }
    }
});
