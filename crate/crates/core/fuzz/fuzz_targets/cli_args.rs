#![no_main]

use libfuzzer_sys::fuzz_target;

// NUL-separated arguments; only parsing and validation run, never a command.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let args = std::iter::once("hepnc").chain(text.split('\0'));
    let _ = hepnc::cli::parse(args);
});
