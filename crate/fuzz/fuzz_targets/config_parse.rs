#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // Config files are attacker-suppliable JSON. Parsing must never panic,
    // and anything that parses must survive a serialize/parse round trip.
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(value) = serde_json::from_str::<serde_json::Value>(text) else {
        return;
    };
    let config_value = match value.get("config") {
        Some(inner) => inner.clone(),
        None => value,
    };
    if let Ok(config) = serde_json::from_value::<botgan::config::RunConfig>(config_value) {
        let echoed = serde_json::to_string(&config).unwrap();
        let back: botgan::config::RunConfig = serde_json::from_str(&echoed).unwrap();
        let _ = back.parse_k_range();
        let _ = back.resolve_seed();
    }
});
