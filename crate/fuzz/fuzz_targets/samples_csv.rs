#![no_main]

use libfuzzer_sys::fuzz_target;
use stretchnet::montecarlo::{read_samples_csv, write_samples_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(set) = read_samples_csv(data) else { return };
    let mut out = Vec::new();
    write_samples_csv(&set, &mut out).expect("parsed samples write");
    let again = read_samples_csv(&out[..]).expect("written samples parse");
    assert_eq!(set.ln_sir.len(), again.ln_sir.len());
});
