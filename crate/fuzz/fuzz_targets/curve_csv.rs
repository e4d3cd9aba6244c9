#![no_main]

use libfuzzer_sys::fuzz_target;
use stretchnet::sweep::{read_curves_csv, write_curves_csv};

// parse, write, parse, write: the two written texts must agree
fuzz_target!(|data: &[u8]| {
    let Ok(curves) = read_curves_csv(data) else { return };
    let mut first = Vec::new();
    write_curves_csv(&curves, &mut first).expect("parsed curves write");
    let reread = read_curves_csv(&first[..]).expect("written curves parse");
    let mut second = Vec::new();
    write_curves_csv(&reread, &mut second).unwrap();
    assert_eq!(first, second);
});
