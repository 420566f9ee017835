#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(k) = s.parse::<ncmart::harness::InequalityKind>() {
            let _ = k.validate();
            let _ = k.to_string().parse::<ncmart::harness::InequalityKind>();
        }
        let _ = ncmart::harness::suite(s);
    }
});
