#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(spec) = s.parse::<ncmart::spaces::SpaceSpec>() {
            let again: ncmart::spaces::SpaceSpec = spec.to_string().parse().expect("display parses");
            assert_eq!(again, spec);
        }
        let _ = s.parse::<ncmart::spaces::SeqSpaceSpec>();
    }
});
