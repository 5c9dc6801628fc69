#![no_main]

use iwasawa_core::normic::{validate_normic, NormicSystemSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = NormicSystemSpec::from_json(text) else { return };
    if let Ok(sys) = spec.build() {
        let report = validate_normic(&sys);
        let rebuilt = sys.to_spec().build().expect("own output builds");
        assert_eq!(validate_normic(&rebuilt).holds(), report.holds());
    }
});
