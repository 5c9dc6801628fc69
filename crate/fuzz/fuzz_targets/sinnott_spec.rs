#![no_main]

use iwasawa_core::sinnott::{level_stats, SinnottModule, SinnottModuleSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = SinnottModuleSpec::from_json(text) else { return };
    if spec.p.pow(spec.d.min(4)) > 64 {
        return;
    }
    if let Ok(module) = SinnottModule::new(&spec) {
        for n in 0..=2 {
            let _ = level_stats(&module, n);
        }
    }
});
