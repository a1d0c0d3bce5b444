#![no_main]

use artgraph::graph::{decode_snapshot, encode_snapshot};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(g) = decode_snapshot(data) {
        g.check_invariants().unwrap();
        let bytes = encode_snapshot(&g);
        assert_eq!(encode_snapshot(&decode_snapshot(&bytes).unwrap()), bytes);
    }
});
