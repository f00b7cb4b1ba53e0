//! End-to-end tests of the command-line surface: exit codes, artifact
//! layout, and manifest-driven reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn botgan(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_botgan"))
        .args(args)
        .current_dir(dir)
        .env_remove("BOTGAN_SEED")
        .output()
        .expect("binary runs")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn synth_then_train_pipeline_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = botgan(
        &[
            "synth", "--rows", "400", "--features", "10", "--separation", "0.8", "--seed", "42",
            "--out", "run",
        ],
        dir.path(),
    );
    assert_success(&out);
    assert!(dir.path().join("run/synth.bdf").exists());
    assert!(dir.path().join("run/synth_manifest.json").exists());

    let out = botgan(
        &[
            "train-gan", "--data", "run/synth.bdf", "--seed", "42", "--out", "run", "--epochs",
            "3", "--batch-size", "64", "--hidden", "16,16", "--noise-dim", "8",
        ],
        dir.path(),
    );
    assert_success(&out);
    for artifact in [
        "run/gan_generator.ckpt",
        "run/gan_discriminator.ckpt",
        "run/gan_train_log.csv",
        "run/gan_eval_report.csv",
        "run/train_gan_manifest.json",
    ] {
        assert!(dir.path().join(artifact).exists(), "missing {artifact}");
    }
    let log = std::fs::read_to_string(dir.path().join("run/gan_train_log.csv")).unwrap();
    assert!(log.starts_with("epoch,d_loss,g_loss,bot_human_ratio,val_acc\n"));
    assert_eq!(log.lines().count(), 4); // header + 3 epochs
}

#[test]
fn missing_seed_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = botgan(&["synth", "--rows", "100", "--features", "5"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("seed"), "{stderr}");
}

#[test]
fn seed_comes_from_environment_as_last_resort() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_botgan"))
        .args(["synth", "--rows", "100", "--features", "5", "--out", "env_run"])
        .current_dir(dir.path())
        .env("BOTGAN_SEED", "77")
        .output()
        .unwrap();
    assert!(out.status.success());
    let manifest =
        std::fs::read_to_string(dir.path().join("env_run/synth_manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 77"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = botgan(&["synth", "--bogus-flag", "1", "--seed", "1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_data_file_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("junk.bdf"), b"XXXX not a dataset").unwrap();
    let out = botgan(
        &["rank-features", "--data", "junk.bdf", "--seed", "1", "--out", "r"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bad magic"), "{stderr}");
}

#[test]
fn dimension_mismatch_is_a_data_error_naming_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&botgan(
        &["synth", "--rows", "200", "--features", "8", "--seed", "3", "--out", "a"],
        dir.path(),
    ));
    assert_success(&botgan(
        &["synth", "--rows", "200", "--features", "6", "--seed", "3", "--out", "b"],
        dir.path(),
    ));
    assert_success(&botgan(
        &[
            "train-gan", "--data", "a/synth.bdf", "--seed", "3", "--out", "a", "--epochs", "1",
            "--batch-size", "64", "--hidden", "8,8", "--noise-dim", "4",
        ],
        dir.path(),
    ));
    let out = botgan(
        &[
            "evaluate", "--model", "a/gan_discriminator.ckpt", "--data", "b/synth.bdf", "--seed",
            "3", "--out", "b",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("6") && stderr.contains("8"), "{stderr}");
}

#[test]
fn rerunning_from_the_manifest_reproduces_outputs_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&botgan(
        &["synth", "--rows", "300", "--features", "8", "--seed", "11", "--out", "d"],
        dir.path(),
    ));
    assert_success(&botgan(
        &[
            "train-gan", "--data", "d/synth.bdf", "--seed", "11", "--out", "run1", "--epochs",
            "3", "--batch-size", "64", "--hidden", "12,12", "--noise-dim", "6", "--sequential",
        ],
        dir.path(),
    ));
    // Re-run purely from the emitted manifest, into a fresh directory.
    assert_success(&botgan(
        &[
            "train-gan", "--config", "run1/train_gan_manifest.json", "--out", "run2",
            "--sequential",
        ],
        dir.path(),
    ));
    for artifact in [
        "gan_generator.ckpt",
        "gan_discriminator.ckpt",
        "gan_train_log.csv",
        "gan_eval_report.csv",
    ] {
        let first = std::fs::read(dir.path().join("run1").join(artifact)).unwrap();
        let second = std::fs::read(dir.path().join("run2").join(artifact)).unwrap();
        assert_eq!(first, second, "{artifact} differs between manifest re-runs");
    }
}

#[test]
fn prepare_imports_csv_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("accounts.csv"),
        "created,ratio,label,followers,posts\n\
         0.1,0.2,human,120,30\n\
         0.9,0.8,bot,3,900\n\
         0.5,0.5,unlabeled,10,10\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("import.json"),
        serde_json::json!({
            "feature_columns": ["created", "ratio"],
            "label_column": "label",
            "created_column": "created",
            "followers_column": "followers",
            "posts_column": "posts"
        })
        .to_string(),
    )
    .unwrap();
    let out = botgan(
        &[
            "prepare", "--csv", "accounts.csv", "--manifest", "import.json", "--seed", "1",
            "--out", "prep",
        ],
        dir.path(),
    );
    assert_success(&out);
    let ds = botgan::data::read_bdf(&dir.path().join("prep/dataset.bdf")).unwrap();
    assert_eq!(ds.n_rows(), 3);
    assert_eq!(ds.created_at_index, Some(0));
    assert_eq!(ds.followers_raw, Some(vec![120.0, 3.0, 10.0]));
}

#[test]
fn sweep_k_emits_table_shaped_csv() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&botgan(
        &["synth", "--rows", "300", "--features", "8", "--seed", "5", "--out", "d"],
        dir.path(),
    ));
    let out = botgan(
        &[
            "sweep-k", "--data", "d/synth.bdf", "--seed", "5", "--out", "s", "--epochs", "2",
            "--batch-size", "64", "--hidden", "8,8", "--noise-dim", "4", "--k", "1..2",
            "--refined", "--refine-epochs", "1",
        ],
        dir.path(),
    );
    assert_success(&out);
    let csv = std::fs::read_to_string(dir.path().join("s/sweep_k.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,dstar_test_accuracy,dstar_test_loss"
    );
    assert_eq!(lines.count(), 2);
    assert!(dir.path().join("s/sweep_k_refined.csv").exists());
}

#[test]
fn json_format_flag_changes_report_encoding() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&botgan(
        &["synth", "--rows", "300", "--features", "8", "--seed", "9", "--out", "d"],
        dir.path(),
    ));
    let out = botgan(
        &[
            "baseline", "--kind", "knn", "--data", "d/synth.bdf", "--seed", "9", "--out", "r",
            "--format", "json",
        ],
        dir.path(),
    );
    assert_success(&out);
    let report = std::fs::read_to_string(dir.path().join("r/baseline_knn_report.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert!(parsed.get("metrics").is_some());
}
