#![no_main]

use artgraph::graph::parse_nodes_tsv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((rows, rejected)) = parse_nodes_tsv(text) {
        assert!(rows.len() + rejected.len() <= text.lines().count());
    }
});
