#![no_main]

use libfuzzer_sys::fuzz_target;

// Parse -> export -> parse must be the identity, and the second export
// must be byte-identical to the first.
fuzz_target!(|data: &[u8]| {
    let Ok(input) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(net) = ibnet::ingest::parse_edges(input) {
        let text = ibnet::ingest::export_edges_string(&net).unwrap();
        let back = ibnet::ingest::parse_edges(&text).unwrap_or_else(|e| {
            panic!("exported edge list failed to re-parse: {e}\n{text}")
        });
        assert_eq!(back, net, "round trip changed the network");
        assert_eq!(ibnet::ingest::export_edges_string(&back).unwrap(), text);
    }
});
