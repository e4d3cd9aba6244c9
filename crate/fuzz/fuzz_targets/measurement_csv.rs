#![no_main]

use libfuzzer_sys::fuzz_target;
use stretchnet::fitting::MeasurementDataset;

fuzz_target!(|data: &[u8]| {
    let Ok(set) = MeasurementDataset::read_csv(data) else { return };
    let mut first = Vec::new();
    set.write_csv(&mut first).expect("parsed data writes");
    let reread = MeasurementDataset::read_csv(&first[..]).expect("written data parses");
    let mut second = Vec::new();
    reread.write_csv(&mut second).unwrap();
    assert_eq!(first, second);
});
