#![no_main]

use libfuzzer_sys::fuzz_target;
use sleeping_core::graph::{load_graph, write_graph};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = load_graph(text) {
        let again = load_graph(&write_graph(&g)).expect("written graph reloads");
        assert_eq!(again, g);
    }
});
