#![no_main]

use libfuzzer_sys::arbitrary::Unstructured;
use libfuzzer_sys::fuzz_target;
use sleeping_core::sim::Codec;

// First 8 bytes pick the id space, the rest is the wire image.
fuzz_target!(|data: &[u8]| {
    let mut u = Unstructured::new(data);
    let Ok(n_hat) = u.arbitrary::<u64>() else {
        return;
    };
    let bytes = u.take_rest();
    let codec = Codec::new(n_hat);
    if let Ok(p) = codec.decode(bytes) {
        let again = codec.encode(&p).expect("decoded payload re-encodes");
        assert_eq!(codec.decode(&again).unwrap(), p);
    }
    if let Ok(ps) = codec.decode_all(bytes) {
        for p in ps {
            assert_eq!(codec.decode(&codec.encode(&p).unwrap()).unwrap(), p);
        }
    }
});
