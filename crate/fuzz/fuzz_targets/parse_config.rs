//! The experiment-file parser must never panic: any byte sequence either
//! parses into a typed config or fails with a line-numbered diagnostic.

#![no_main]

use libfuzzer_sys::fuzz_target;

use gaussiso::config::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        match ExperimentConfig::parse(text) {
            Ok(cfg) => {
                // A parsed config must be internally coherent enough for
                // the cheap derived queries not to panic either.
                let _ = cfg.density();
                let _ = cfg.kind;
            }
            Err(e) => {
                let _ = format!("{e}");
            }
        }
    }
});
