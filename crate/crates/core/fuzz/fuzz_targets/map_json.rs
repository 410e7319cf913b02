#![no_main]

use hepnc::clustering::{map_from_json, map_to_json, maps_from_json, MapLibrary};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = map_from_json(text) {
        assert_eq!(map_from_json(&map_to_json(&m)).unwrap(), m);
        let _ = m.validate();
    }
    if let Ok(maps) = maps_from_json(text) {
        if let Some(first) = maps.first() {
            let _ = MapLibrary::new(first.scheme().clone(), maps.clone());
        }
    }
});
