#![no_main]

use libfuzzer_sys::fuzz_target;
use supent::sweep::{parse_grid, MAX_GRID_POINTS};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(grid) = parse_grid(text) else {
        return;
    };
    assert!(grid.len() >= 1 && grid.len() <= MAX_GRID_POINTS);
    for axis in &grid.axes {
        let v = axis.values();
        assert_eq!(v.len(), axis.steps);
        assert_eq!(v[0], axis.start);
    }
});
