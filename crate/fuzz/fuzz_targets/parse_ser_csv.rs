#![no_main]

use cpless::harness::{csv_string, parse_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(records) = parse_csv(s) {
            if !records.is_empty() {
                let text = csv_string(&records).expect("parsed records serialize");
                assert_eq!(parse_csv(&text).expect("serialized records parse"), records);
            }
        }
    }
});
