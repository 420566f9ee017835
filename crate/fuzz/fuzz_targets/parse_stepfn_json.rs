#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(f) = ncmart::stepfn::StepFunction::from_json(s) {
            let back = ncmart::stepfn::StepFunction::from_json(&f.to_json()).expect("round trip");
            assert_eq!(back, f);
        }
    }
});
