#![no_main]

use artgraph::model::{decode_checkpoint, encode_checkpoint};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(ck) = decode_checkpoint(data) {
        let back = decode_checkpoint(&encode_checkpoint(&ck).unwrap()).unwrap();
        assert!(back.bit_eq(&ck));
    }
});
