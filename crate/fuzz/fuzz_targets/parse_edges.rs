#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(input) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(net) = ibnet::ingest::parse_edges(input) {
        // Handshake identity on whatever parsed.
        let degrees = net.degrees().unwrap();
        let k_in: usize = degrees.iter().map(|r| r.k_in).sum();
        let k_out: usize = degrees.iter().map(|r| r.k_out).sum();
        assert_eq!(k_in, net.edge_count());
        assert_eq!(k_out, net.edge_count());
        for (b, l, w) in net.edges() {
            assert_ne!(b, l, "self-loop survived parsing");
            assert!(!w.is_zero(), "zero weight survived parsing");
        }
    }
});
