#![no_main]

use artgraph::experiment::{decode_features, encode_features};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = decode_features(data) {
        assert_eq!(decode_features(&encode_features(&t)).unwrap(), t);
    }
});
