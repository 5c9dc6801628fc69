#![no_main]

use iwasawa_core::function_fields::{Curve, CurveModel};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&q_byte, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let Ok(model) = text.parse::<CurveModel>() else { return };
    let shown = model.to_string();
    assert_eq!(shown.parse::<CurveModel>().ok().as_ref(), Some(&model));
    let q = [2u64, 3, 4, 5, 7, 8, 9][q_byte as usize % 7];
    let _ = Curve::from_descriptor(q, &shown);
});
