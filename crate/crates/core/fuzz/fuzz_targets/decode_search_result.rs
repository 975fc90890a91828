#![no_main]

use libfuzzer_sys::fuzz_target;
use supent::search::{verify_result, SearchResult};

fuzz_target!(|data: &[u8]| {
    let Ok(result) = serde_json::from_slice::<SearchResult>(data) else {
        return;
    };
    // verification may reject, but must not panic
    let _ = verify_result(&result);
});
