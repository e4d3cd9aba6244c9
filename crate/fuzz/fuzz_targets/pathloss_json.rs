#![no_main]

use libfuzzer_sys::fuzz_target;
use stretchnet::PathLossModel;

fuzz_target!(|text: &str| {
    let Ok(model) = PathLossModel::from_json(text) else { return };
    let again = PathLossModel::from_json(&model.to_json()).expect("serialized model parses");
    assert_eq!(model, again);
    for r in [1.0, 10.0, 1000.0] {
        if let Ok(g) = model.log_gain(r) {
            assert!(!g.is_nan());
        }
    }
});
