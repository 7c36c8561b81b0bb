#![no_main]

use libfuzzer_sys::fuzz_target;
use reglab::io::ConfigDocument;
use reglab_cli::{ExperimentConfig, Overrides};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(doc) = ConfigDocument::parse(text) {
        let _ = ExperimentConfig::from_document(&doc, &Overrides::default());
    }
});
