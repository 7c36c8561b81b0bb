#![no_main]

use libfuzzer_sys::fuzz_target;
use reglab::io::{decode_trajectory, encode_trajectory};

fuzz_target!(|data: &[u8]| {
    // Anything that decodes must re-encode to the same bytes.
    if let Ok(traj) = decode_trajectory(data) {
        assert_eq!(encode_trajectory(&traj), data);
    }
});
