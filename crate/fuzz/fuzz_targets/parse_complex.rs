#![no_main]

use cpless::harness::parse_complex_arg;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(z) = parse_complex_arg(s) {
            assert!(z.re.is_finite() && z.im.is_finite());
        }
    }
});
