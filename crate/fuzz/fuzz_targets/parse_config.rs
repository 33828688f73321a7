#![no_main]

use cpless::harness::CampaignConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(cfg) = CampaignConfig::from_toml_str(s) {
            let again = CampaignConfig::from_toml_str(&cfg.to_toml_string()).expect("serialized config parses");
            assert_eq!(again.to_toml_string(), cfg.to_toml_string());
        }
    }
});
