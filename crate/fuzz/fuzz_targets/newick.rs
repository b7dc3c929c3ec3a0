#![no_main]

use libfuzzer_sys::fuzz_target;
use phylocomb::tree::{from_newick, to_newick};

fuzz_target!(|data: &[u8]| {
    // Malformed Newick must be an error, never a panic.
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(t) = from_newick(s) {
            // anything accepted must survive a round trip
            assert_eq!(from_newick(&to_newick(&t)).ok(), Some(t));
        }
    }
});
