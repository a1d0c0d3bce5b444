#![no_main]

use artgraph::model::{decode_dataset, encode_dataset};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok((manifest, set)) = decode_dataset(data) {
        let bytes = encode_dataset(&manifest, &set).unwrap();
        assert_eq!(decode_dataset(&bytes).unwrap(), (manifest, set));
    }
});
