#![no_main]

use libfuzzer_sys::fuzz_target;
use phylocomb::tree::{from_hierarchy, hierarchy_from_json};

fuzz_target!(|data: &[u8]| {
    // JSON cluster lists, then the tree builder.
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(h) = hierarchy_from_json(s) {
            let _ = from_hierarchy(&h);
        }
    }
});
