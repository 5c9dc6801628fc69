#![no_main]

use iwasawa_core::function_fields::PlaceDescriptor;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(place) = text.parse::<PlaceDescriptor>() {
        assert_eq!(place.to_string().parse::<PlaceDescriptor>().ok(), Some(place));
    }
});
