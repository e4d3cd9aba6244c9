#![no_main]

use libfuzzer_sys::fuzz_target;
use stretchnet::sweep::Config;

fuzz_target!(|text: &str| {
    let Ok(config) = Config::from_json(text) else { return };
    let again = Config::from_json(&config.to_json()).expect("serialized config parses");
    assert_eq!(config, again);
    let _ = config.network.resolve();
});
