#![no_main]

// Input is the nodes file, a NUL byte, then the edges file.

use artgraph::graph::{decode_snapshot, encode_snapshot, PropertyGraph};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let (nodes, edges) = text.split_once('\0').unwrap_or((text, ""));
    let mut g = PropertyGraph::new();
    if g.ingest(nodes, edges).is_ok() {
        g.check_invariants().unwrap();
        let bytes = encode_snapshot(&g);
        let back = decode_snapshot(&bytes).unwrap();
        assert_eq!(encode_snapshot(&back), bytes);
        let before = g.stats();
        g.ingest(nodes, edges).unwrap();
        assert_eq!(g.stats(), before);
    }
});
