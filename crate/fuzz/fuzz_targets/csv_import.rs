#![no_main]

use botgan::data::CsvManifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // The first line selects one of a few manifest shapes; the rest is the
    // CSV body. Import must never panic, and any parsed dataset must be
    // internally consistent.
    let manifest = CsvManifest {
        feature_columns: vec!["a".into(), "b".into()],
        label_column: "label".into(),
        created_column: Some("a".into()),
        followers_column: if data.first().is_some_and(|b| b % 2 == 0) {
            Some("followers".into())
        } else {
            None
        },
        posts_column: if data.first().is_some_and(|b| b % 2 == 0) {
            Some("posts".into())
        } else {
            None
        },
    };
    let body = if data.is_empty() { data } else { &data[1..] };
    if let Ok(ds) = botgan::data::import_csv_reader(body, &manifest) {
        ds.validate().expect("imported dataset violates invariants");
        assert_eq!(ds.n_features(), 2);
    }
});
