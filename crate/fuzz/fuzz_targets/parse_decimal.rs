#![no_main]

use libfuzzer_sys::fuzz_target;

// Money and exact-decimal parsing: never panic, and everything that
// parses must round-trip through its canonical rendering.
fuzz_target!(|data: &[u8]| {
    let Ok(input) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(money) = input.parse::<ibnet::Money>() {
        let rendered = money.to_string();
        assert_eq!(rendered.parse::<ibnet::Money>().unwrap(), money);
    }
    if let Ok(ratio) = ibnet::money::parse_decimal_rational(input) {
        assert!(*ratio.denom() > 0);
        let rendered = ibnet::money::rational_to_decimal_string(&ratio);
        if !rendered.contains('/') {
            assert_eq!(
                ibnet::money::parse_decimal_rational(&rendered).unwrap(),
                ratio
            );
        }
    }
});
