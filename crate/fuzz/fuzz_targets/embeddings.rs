#![no_main]

use artgraph::embed::{decode_embeddings, encode_embeddings};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = decode_embeddings(data) {
        assert_eq!(decode_embeddings(&encode_embeddings(&t)).unwrap(), t);
    }
});
