//! Property tests for the crate's cross-module invariants.

use botgan::data::{
    minmax_scale, read_bdf_bytes, split_80_10_10, write_bdf, Dataset, Label,
};
use botgan::features::information_gain;
use botgan::gan::{detect_mode_collapse, EpochRecord, Ratio, TrainLog};
use botgan::metrics::{classification_metrics, impact_mitigation, percentile_f1};
use botgan::nn::bce_with_logits;
use botgan::Rng;
use ndarray::Array2;
use proptest::prelude::*;

fn label_from_u8(b: u8) -> Label {
    match b % 3 {
        0 => Label::Human,
        1 => Label::Bot,
        _ => Label::Unlabeled,
    }
}

fn arb_dataset() -> impl Strategy<Value = Dataset> {
    (1usize..12, 1usize..6, any::<u64>(), any::<bool>()).prop_map(|(n, d, seed, with_raw)| {
        let mut rng = Rng::new(seed);
        let features = Array2::from_shape_fn((n, d), |_| rng.next_f64() as f32);
        let labels: Vec<Label> = (0..n).map(|_| label_from_u8(rng.next_u64() as u8)).collect();
        let names = (0..d).map(|j| format!("f{j}")).collect();
        let mut ds = Dataset::new(features, labels, names).unwrap();
        ds.created_at_index = Some(0);
        if with_raw {
            ds.followers_raw = Some((0..n).map(|_| rng.next_f64() * 100.0).collect());
            ds.posts_raw = Some((0..n).map(|_| rng.next_f64() * 50.0).collect());
        }
        ds
    })
}

proptest! {
    #[test]
    fn bdf_round_trip_is_lossless(ds in arb_dataset()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.bdf");
        write_bdf(&ds, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let back = read_bdf_bytes(&bytes).unwrap();
        prop_assert_eq!(ds, back);
    }

    #[test]
    fn truncated_bdf_never_panics(ds in arb_dataset(), cut in 0usize..200) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.bdf");
        write_bdf(&ds, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let cut = cut.min(bytes.len());
        // Every prefix either parses or errors cleanly.
        let _ = read_bdf_bytes(&bytes[..bytes.len() - cut]);
    }

    #[test]
    fn corrupted_bdf_never_panics(
        ds in arb_dataset(),
        flips in proptest::collection::vec((any::<u16>(), any::<u8>()), 1..8),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.bdf");
        write_bdf(&ds, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        for (pos, value) in flips {
            let idx = pos as usize % bytes.len();
            bytes[idx] = value;
        }
        // Mutated files parse or fail; either way no panic, and anything
        // that parses still satisfies the container invariants.
        if let Ok(parsed) = read_bdf_bytes(&bytes) {
            parsed.validate().unwrap();
        }
    }

    #[test]
    fn corrupted_checkpoint_never_panics(
        seed in any::<u64>(),
        flips in proptest::collection::vec((any::<u16>(), any::<u8>()), 1..8),
    ) {
        use botgan::checkpoint::{load_checkpoint_bytes, save_checkpoint, Checkpoint, ModelKind};
        use botgan::gan::{DiscriminatorNet, GanConfig};

        let config = GanConfig {
            noise_dim: 4,
            hidden_widths: vec![6],
            ..GanConfig::with_feature_dim(5)
        };
        let disc = DiscriminatorNet::init(&config, &mut Rng::new(seed)).unwrap();
        let ckpt = Checkpoint::new(
            ModelKind::Discriminator,
            &disc.params,
            serde_json::json!({}),
            seed,
            1,
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        save_checkpoint(&ckpt, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        for (pos, value) in flips {
            let idx = pos as usize % bytes.len();
            bytes[idx] = value;
        }
        if let Ok(parsed) = load_checkpoint_bytes(&bytes) {
            for (layer, weights) in parsed.params.layers.iter().zip(&parsed.params.weights) {
                prop_assert_eq!(weights.dim(), (layer.out_dim, layer.in_dim));
            }
        }
    }

    #[test]
    fn scaling_maps_into_unit_interval_and_is_idempotent(ds in arb_dataset()) {
        let (scaled, _) = minmax_scale(&ds).unwrap();
        prop_assert!(scaled.features.iter().all(|&x| (0.0..=1.0).contains(&x)));
        let (twice, _) = minmax_scale(&scaled).unwrap();
        prop_assert_eq!(scaled.features, twice.features);
    }

    #[test]
    fn impact_mitigation_bounded(
        seed in any::<u64>(),
        n in 1usize..40,
    ) {
        let mut rng = Rng::new(seed);
        let raw: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 0.0);
        let impacts: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let predictions: Vec<u8> = (0..n).map(|_| (rng.next_u64() & 1) as u8).collect();
        let labels: Vec<u8> = (0..n).map(|_| (rng.next_u64() & 1) as u8).collect();
        let m = impact_mitigation(&predictions, &labels, &impacts).unwrap();
        prop_assert!((-1.0..=1.0).contains(&m), "mitigation {} out of bounds", m);

        let all_correct = impact_mitigation(&labels, &labels, &impacts).unwrap();
        prop_assert!((all_correct - 1.0).abs() < 1e-9);
        let flipped: Vec<u8> = labels.iter().map(|&y| 1 - y).collect();
        let all_wrong = impact_mitigation(&flipped, &labels, &impacts).unwrap();
        prop_assert!((all_wrong + 1.0).abs() < 1e-9);
    }

    #[test]
    fn flipping_one_prediction_shifts_mitigation_by_two_impacts(
        seed in any::<u64>(),
        n in 2usize..30,
    ) {
        let mut rng = Rng::new(seed);
        let raw: Vec<f64> = (0..n).map(|_| rng.next_f64() + 0.01).collect();
        let total: f64 = raw.iter().sum();
        let impacts: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let predictions: Vec<u8> = (0..n).map(|_| (rng.next_u64() & 1) as u8).collect();
        let labels: Vec<u8> = (0..n).map(|_| (rng.next_u64() & 1) as u8).collect();
        let base = impact_mitigation(&predictions, &labels, &impacts).unwrap();

        let flip = rng.index(n);
        let mut flipped = predictions.clone();
        flipped[flip] = 1 - flipped[flip];
        let moved = impact_mitigation(&flipped, &labels, &impacts).unwrap();
        prop_assert!(((base - moved).abs() - 2.0 * impacts[flip]).abs() < 1e-12);
    }

    #[test]
    fn bce_finite_over_stated_domain(
        logit in -1e3f64..1e3,
        target in 0.0f64..=1.0,
    ) {
        let (loss, grad) = bce_with_logits(&[logit], &[target]).unwrap();
        prop_assert!(loss.is_finite());
        prop_assert!(grad[0].is_finite());
    }

    #[test]
    fn detect_mode_collapse_threshold_monotone(
        seed in any::<u64>(),
        n in 1usize..40,
        t1 in 0.5f64..60.0,
        t2 in 0.5f64..60.0,
    ) {
        let mut rng = Rng::new(seed);
        let epochs: Vec<EpochRecord> = (0..n)
            .map(|_| EpochRecord {
                d_loss: 0.0,
                g_loss: 0.0,
                bot_human_ratio: if rng.next_f64() < 0.1 {
                    Ratio::Infinite
                } else {
                    Ratio::Finite(rng.next_f64() * 80.0)
                },
                hb_validation_accuracy: 0.0,
            })
            .collect();
        let log = TrainLog { epochs };
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let at_lo = detect_mode_collapse(&log, lo, 3).map_or(usize::MAX, |e| e);
        let at_hi = detect_mode_collapse(&log, hi, 3).map_or(usize::MAX, |e| e);
        prop_assert!(at_hi >= at_lo);
    }

    #[test]
    fn information_gain_bounded_by_label_entropy(seed in any::<u64>(), n in 10usize..200) {
        let mut rng = Rng::new(seed);
        let features = Array2::from_shape_fn((n, 3), |_| rng.next_f64() as f32);
        let labels: Vec<Label> = (0..n)
            .map(|_| if rng.next_f64() < 0.4 { Label::Bot } else { Label::Human })
            .collect();
        let bots = labels.iter().filter(|&&l| l == Label::Bot).count();
        prop_assume!(bots > 0 && bots < n);
        let p = bots as f64 / n as f64;
        let h = -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
        let names = (0..3).map(|j| format!("f{j}")).collect();
        let ds = Dataset::new(features, labels, names).unwrap();
        let ranking = information_gain(&ds, 10).unwrap();
        for &score in &ranking.scores {
            prop_assert!(score >= -1e-12 && score <= h + 1e-12);
        }
    }

    #[test]
    fn split_partitions_labeled_rows(seed in any::<u64>(), n in 20usize..300) {
        let mut rng = Rng::new(seed);
        let labels: Vec<Label> = (0..n).map(|_| label_from_u8(rng.next_u64() as u8)).collect();
        let labeled = labels.iter().filter(|l| l.is_labeled()).count();
        prop_assume!(labeled >= 10);
        let names = vec!["f0".to_string()];
        let ds = Dataset::new(Array2::zeros((n, 1)), labels, names).unwrap();
        let split = split_80_10_10(&ds, &mut Rng::new(seed ^ 1)).unwrap();
        let mut all: Vec<usize> = split
            .train
            .iter()
            .chain(&split.validation)
            .chain(&split.test)
            .copied()
            .collect();
        all.sort_unstable();
        all.dedup();
        prop_assert_eq!(all.len(), labeled);
        prop_assert!(all.iter().all(|&i| ds.labels[i].is_labeled()));
    }

    #[test]
    fn whole_set_percentile_band_equals_global_f1(seed in any::<u64>(), n in 4usize..60) {
        let mut rng = Rng::new(seed);
        let features = Array2::from_shape_fn((n, 2), |_| rng.next_f64() as f32);
        let labels: Vec<Label> = (0..n)
            .map(|_| if rng.next_f64() < 0.5 { Label::Bot } else { Label::Human })
            .collect();
        let byte_labels: Vec<u8> = labels.iter().map(|l| l.to_byte()).collect();
        let names = vec!["created".to_string(), "x".to_string()];
        let mut ds = Dataset::new(features, labels, names).unwrap();
        ds.created_at_index = Some(0);

        let predictions: Vec<u8> = (0..n).map(|_| (rng.next_u64() & 1) as u8).collect();
        // percentile_f1 reorders rows by creation time; mirror that order.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            ds.features[[a, 0]].partial_cmp(&ds.features[[b, 0]]).unwrap()
        });
        let sorted_predictions: Vec<u8> = order.iter().map(|&i| predictions[i]).collect();
        let sorted_labels: Vec<u8> = order.iter().map(|&i| byte_labels[i]).collect();

        let preds = sorted_predictions.clone();
        let bands = percentile_f1(
            move |_features| Ok(preds),
            &ds,
            100.0,
            true,
        )
        .unwrap();
        let global = classification_metrics(&sorted_predictions, &sorted_labels)
            .unwrap()
            .bot_positive
            .f1;
        prop_assert_eq!(bands.len(), 1);
        prop_assert!((bands[0].f1 - global).abs() < 1e-15);
    }
}
