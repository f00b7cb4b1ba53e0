#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // Arbitrary bytes must either parse into a valid dataset or fail with
    // a clean error; a parsed dataset must satisfy its own invariants.
    if let Ok(ds) = botgan::data::read_bdf_bytes(data) {
        ds.validate().expect("parsed dataset violates invariants");

        // Finite datasets must survive a write/read round trip exactly
        // (NaN payloads round-trip too but defeat equality comparison).
        let finite = ds.features.iter().all(|x| x.is_finite())
            && ds.followers_raw.iter().flatten().all(|x| x.is_finite())
            && ds.posts_raw.iter().flatten().all(|x| x.is_finite());
        if finite {
            let dir = std::env::temp_dir().join(format!("bdf_fuzz_{}", std::process::id()));
            std::fs::create_dir_all(&dir).unwrap();
            let path = dir.join("roundtrip.bdf");
            botgan::data::write_bdf(&ds, &path).expect("round-trip write");
            let back = botgan::data::read_bdf(&path).expect("round-trip read");
            assert_eq!(ds, back);
        }
    }
});
