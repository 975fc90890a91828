#![no_main]

use libfuzzer_sys::fuzz_target;
use supent::io::{parse_state_json, write_state_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(state) = parse_state_json(text) else {
        return;
    };
    // anything accepted must survive a write/parse cycle unchanged
    let again = parse_state_json(&write_state_json(&state)).expect("writer output parses");
    assert_eq!(again, state);
    let _ = supent::entanglement::entanglement_of_normalized(&state);
});
