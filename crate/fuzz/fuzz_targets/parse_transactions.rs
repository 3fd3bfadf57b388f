#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(input) = std::str::from_utf8(data) else {
        return;
    };
    // Parsing must never panic; on success the log invariants hold.
    if let Ok(log) = ibnet::ingest::parse_transactions(input) {
        let records = log.records();
        for pair in records.windows(2) {
            assert!(pair[0].date <= pair[1].date, "log not sorted by date");
        }
        if let Some((first, last)) = log.span() {
            assert!(first <= last);
            for tx in records {
                assert!(tx.date >= first && tx.date <= last);
                assert!(!tx.amount.is_zero());
                assert_ne!(tx.borrower, tx.lender);
            }
        } else {
            assert!(records.is_empty());
        }
        let _ = ibnet::ingest::daily_networks(&log);
    }
});
