//! Evaluation machinery: classification metrics, impact and impact
//! mitigation, per-creation-date percentile F1, generator closeness
//! analysis, and the augmentation sweep.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::gan::{augment_dataset, generate_samples, GeneratorNet};
use crate::rng::Rng;

/// Accuracy, precision, recall and F1 for one positive-class convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSet {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Classification metrics in both conventions: bot-as-positive binary and
/// macro-averaged over the two classes. Macro F1 is the harmonic mean of
/// macro precision and macro recall; macro accuracy equals plain accuracy
/// (it has no positive-class dependence).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub bot_positive: MetricsSet,
    pub macro_avg: MetricsSet,
}

fn safe_div(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Computes metrics from hard predictions and labels (both over {0,1},
/// bot = 1). Precision and recall are 0 when their denominator is 0.
pub fn classification_metrics(predictions: &[u8], labels: &[u8]) -> Result<MetricsRecord> {
    if predictions.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} predictions vs {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Domain("metrics on empty input".into()));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &y) in predictions.iter().zip(labels) {
        match (p, y) {
            (1, 1) => tp += 1,
            (1, 0) => fp += 1,
            (0, 0) => tn += 1,
            (0, 1) => fn_ += 1,
            _ => {
                return Err(Error::Domain(
                    "predictions and labels must be 0 or 1".into(),
                ))
            }
        }
    }
    let total = predictions.len() as f64;
    let accuracy = (tp + tn) as f64 / total;

    let precision_bot = safe_div(tp as f64, (tp + fp) as f64);
    let recall_bot = safe_div(tp as f64, (tp + fn_) as f64);
    let precision_human = safe_div(tn as f64, (tn + fn_) as f64);
    let recall_human = safe_div(tn as f64, (tn + fp) as f64);

    let macro_precision = 0.5 * (precision_bot + precision_human);
    let macro_recall = 0.5 * (recall_bot + recall_human);

    Ok(MetricsRecord {
        bot_positive: MetricsSet {
            accuracy,
            precision: precision_bot,
            recall: recall_bot,
            f1: harmonic(precision_bot, recall_bot),
        },
        macro_avg: MetricsSet {
            accuracy,
            precision: macro_precision,
            recall: macro_recall,
            f1: harmonic(macro_precision, macro_recall),
        },
    })
}

/// One account's follower count, post count, and normalized impact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpactRecord {
    pub followers: f64,
    pub posts: f64,
    pub impact: f64,
}

/// Normalized impacts over an evaluation set, with a degenerate flag when
/// every follower-post product is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactScores {
    pub records: Vec<ImpactRecord>,
    pub degenerate: bool,
}

impl ImpactScores {
    pub fn impacts(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.impact).collect()
    }
}

/// `impact_i = F_i * P_i / sum_j F_j * P_j`. All-zero products yield zero
/// impacts flagged degenerate.
pub fn impact_scores(followers: &[f64], posts: &[f64]) -> Result<ImpactScores> {
    if followers.len() != posts.len() {
        return Err(Error::Shape(format!(
            "{} follower counts vs {} post counts",
            followers.len(),
            posts.len()
        )));
    }
    if let Some(bad) = followers.iter().chain(posts).find(|&&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::Domain(format!(
            "follower/post counts must be non-negative and finite, got {bad}"
        )));
    }
    let products: Vec<f64> = followers.iter().zip(posts).map(|(&f, &p)| f * p).collect();
    let total: f64 = products.iter().sum();
    let degenerate = total == 0.0;
    let records = followers
        .iter()
        .zip(posts)
        .zip(&products)
        .map(|((&f, &p), &prod)| ImpactRecord {
            followers: f,
            posts: p,
            impact: if degenerate { 0.0 } else { prod / total },
        })
        .collect();
    Ok(ImpactScores {
        records,
        degenerate,
    })
}

/// Signed sum of impacts: `+impact_i` when `prediction_i == label_i`,
/// `-impact_i` otherwise. Bounded in `[-1, 1]`. Impacts must be normalized
/// over this evaluation set (all-zero degenerate impacts are accepted and
/// give 0).
pub fn impact_mitigation(predictions: &[u8], labels: &[u8], impacts: &[f64]) -> Result<f64> {
    if predictions.len() != labels.len() || predictions.len() != impacts.len() {
        return Err(Error::Shape(format!(
            "length mismatch: {} predictions, {} labels, {} impacts",
            predictions.len(),
            labels.len(),
            impacts.len()
        )));
    }
    let sum: f64 = impacts.iter().sum();
    let degenerate = impacts.iter().all(|&x| x == 0.0);
    if !degenerate && (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "impacts must sum to 1 over the evaluation set, got {sum}"
        )));
    }
    Ok(predictions
        .iter()
        .zip(labels)
        .zip(impacts)
        .map(|((&p, &y), &impact)| if p == y { impact } else { -impact })
        .sum())
}

/// F1 over one creation-age percentile band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PercentileBand {
    pub band_upper_percentile: f64,
    pub f1: f64,
}

/// Evaluates bot-positive F1 over creation-age percentile bands of the
/// labeled test rows, oldest accounts first. Bands are cumulative
/// (`[0,b], [0,2b], ...`) by default; `cumulative = false` switches to
/// disjoint bands `((k-1)b, kb]`. `band_percent` must divide 100.
pub fn percentile_f1<F>(
    predict: F,
    test_data: &Dataset,
    band_percent: f64,
    cumulative: bool,
) -> Result<Vec<PercentileBand>>
where
    F: FnOnce(ArrayView2<f64>) -> Result<Vec<u8>>,
{
    let created_idx = test_data.created_at_index.ok_or_else(|| {
        Error::Domain("percentile evaluation needs a created-at feature".into())
    })?;
    if !band_percent.is_finite() || band_percent <= 0.0 {
        return Err(Error::Domain("band_percent must be positive".into()));
    }
    let n_bands = 100.0 / band_percent;
    if (n_bands - n_bands.round()).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "band_percent must divide 100, got {band_percent}"
        )));
    }
    let n_bands = n_bands.round() as usize;

    let mut rows = test_data.labeled_indices();
    if rows.is_empty() {
        return Err(Error::Domain("no labeled rows to evaluate".into()));
    }
    // Oldest first: smaller scaled creation time = earlier account. Ties
    // break by row index (sort is stable over the index order).
    rows.sort_by(|&a, &b| {
        test_data.features[[a, created_idx]]
            .partial_cmp(&test_data.features[[b, created_idx]])
            .expect("scaled features are finite")
    });

    let predictions = predict(test_data.rows_f64(&rows).view())?;
    if predictions.len() != rows.len() {
        return Err(Error::Shape(format!(
            "prediction function returned {} labels for {} rows",
            predictions.len(),
            rows.len()
        )));
    }
    let labels: Vec<u8> = rows.iter().map(|&i| test_data.labels[i].to_byte()).collect();

    let n = rows.len();
    let boundary = |percentile: f64| -> usize {
        ((n as f64 * percentile / 100.0).ceil() as usize).min(n)
    };
    let mut bands = Vec::with_capacity(n_bands);
    for band in 1..=n_bands {
        let upper = band_percent * band as f64;
        let hi = boundary(upper);
        let lo = if cumulative {
            0
        } else {
            boundary(band_percent * (band - 1) as f64)
        };
        let f1 = if hi > lo {
            classification_metrics(&predictions[lo..hi], &labels[lo..hi])?
                .bot_positive
                .f1
        } else {
            0.0
        };
        bands.push(PercentileBand {
            band_upper_percentile: upper,
            f1,
        });
    }
    Ok(bands)
}

/// How often the generator lands within tolerance of the mean human value
/// for one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosenessRecord {
    pub feature_index: usize,
    pub feature_name: String,
    pub close_count: usize,
    pub close_fraction: f64,
}

/// Counts generated samples within `tolerance` (relative, with a 1e-6
/// absolute floor) of the per-feature mean over real human rows. Output is
/// sorted by descending close count (ties: lower feature index).
pub fn closeness_analysis(
    generator: &GeneratorNet,
    real: &Dataset,
    tolerance: f64,
    n_samples: usize,
    rng: &mut Rng,
) -> Result<Vec<ClosenessRecord>> {
    if n_samples == 0 {
        return Err(Error::Domain("n_samples must be at least 1".into()));
    }
    if generator.feature_dim != real.n_features() {
        return Err(Error::Shape(format!(
            "generator emits {} features, dataset has {}",
            generator.feature_dim,
            real.n_features()
        )));
    }
    let humans: Vec<usize> = (0..real.n_rows())
        .filter(|&i| real.labels[i] == Label::Human)
        .collect();
    if humans.is_empty() {
        return Err(Error::Domain("closeness analysis needs human rows".into()));
    }

    let d = real.n_features();
    let mut means = vec![0.0f64; d];
    for &i in &humans {
        for (mean, &x) in means.iter_mut().zip(real.features.row(i)) {
            *mean += f64::from(x);
        }
    }
    for m in &mut means {
        *m /= humans.len() as f64;
    }

    let (samples, _) = generate_samples(generator, n_samples, rng)?;
    let mut records: Vec<ClosenessRecord> = (0..d)
        .map(|j| {
            let limit = tolerance * means[j].abs().max(1e-6);
            let close_count = samples
                .column(j)
                .iter()
                .filter(|&&x| (x - means[j]).abs() <= limit)
                .count();
            ClosenessRecord {
                feature_index: j,
                feature_name: real.feature_names[j].clone(),
                close_count,
                close_fraction: close_count as f64 / n_samples as f64,
            }
        })
        .collect();
    records.sort_by(|a, b| {
        b.close_count
            .cmp(&a.close_count)
            .then(a.feature_index.cmp(&b.feature_index))
    });
    Ok(records)
}

/// Mean test accuracy/loss at one augmentation fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentationPoint {
    pub fraction: f64,
    pub test_accuracy: f64,
    pub test_loss: f64,
}

/// For each fraction, replaces that share of `real` with generated samples,
/// hands the augmented set to `trainer` (which trains and evaluates a
/// discriminator, returning `(test_accuracy, test_loss)`), and averages
/// over `runs` seeded repetitions. Output is sorted ascending by fraction.
pub fn augmentation_sweep<F>(
    trainer: F,
    real: &Dataset,
    generator: &GeneratorNet,
    fractions: &[f64],
    runs: usize,
    rng: &Rng,
) -> Result<Vec<AugmentationPoint>>
where
    F: Fn(&Dataset, u64) -> Result<(f64, f64)>,
{
    if fractions.is_empty() {
        return Err(Error::Domain("fractions must be non-empty".into()));
    }
    if runs == 0 {
        return Err(Error::Domain("runs must be at least 1".into()));
    }
    let mut points = Vec::with_capacity(fractions.len());
    for (fi, &fraction) in fractions.iter().enumerate() {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::Domain(format!(
                "fractions must lie in [0,1], got {fraction}"
            )));
        }
        let mut acc_sum = 0.0;
        let mut loss_sum = 0.0;
        for run in 0..runs {
            let mut run_rng = rng.derive(&format!("aug/fraction={fi}/run={run}"));
            let augmented = augment_dataset(real, generator, fraction, &mut run_rng)?;
            let (acc, loss) = trainer(&augmented, run_rng.seed())?;
            acc_sum += acc;
            loss_sum += loss;
        }
        points.push(AugmentationPoint {
            fraction,
            test_accuracy: acc_sum / runs as f64,
            test_loss: loss_sum / runs as f64,
        });
    }
    points.sort_by(|a, b| a.fraction.partial_cmp(&b.fraction).unwrap());
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SynthConfig;
    use crate::gan::GanConfig;

    #[test]
    fn perfect_predictions_score_one() {
        let m = classification_metrics(&[1, 0, 1, 0], &[1, 0, 1, 0]).unwrap();
        assert_eq!(m.bot_positive.accuracy, 1.0);
        assert_eq!(m.bot_positive.f1, 1.0);
        assert_eq!(m.macro_avg.f1, 1.0);
    }

    #[test]
    fn hand_confusion_matrix() {
        // TP=2, FP=1, FN=1, TN=6.
        let predictions = [1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
        let labels = [1, 1, 0, 1, 0, 0, 0, 0, 0, 0];
        let m = classification_metrics(&predictions, &labels).unwrap();
        assert!((m.bot_positive.accuracy - 0.8).abs() < 1e-15);
        assert!((m.bot_positive.precision - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.bot_positive.recall - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.bot_positive.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn f1_is_harmonic_mean_per_variant() {
        let m = classification_metrics(&[1, 1, 0, 0, 1], &[1, 0, 0, 1, 1]).unwrap();
        for set in [m.bot_positive, m.macro_avg] {
            assert!((set.f1 - harmonic(set.precision, set.recall)).abs() < 1e-12);
        }
    }

    #[test]
    fn macro_equals_bot_positive_when_symmetric() {
        // TP=TN=3, FP=FN=1.
        let predictions = [1, 1, 1, 1, 0, 0, 0, 0];
        let labels = [1, 1, 1, 0, 0, 0, 0, 1];
        let m = classification_metrics(&predictions, &labels).unwrap();
        assert!((m.bot_positive.f1 - m.macro_avg.f1).abs() < 1e-12);
    }

    #[test]
    fn zero_denominator_conventions() {
        // No bot predictions at all: precision 0; no bot labels: recall 0.
        let m = classification_metrics(&[0, 0], &[1, 0]).unwrap();
        assert_eq!(m.bot_positive.precision, 0.0);
        assert_eq!(m.bot_positive.f1, 0.0);
    }

    #[test]
    fn impact_symmetry_and_hand_case() {
        let scores = impact_scores(&[10.0, 10.0], &[5.0, 5.0]).unwrap();
        assert_eq!(scores.impacts(), vec![0.5, 0.5]);
        assert!(!scores.degenerate);

        let scores = impact_scores(&[3.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(scores.impacts(), vec![0.75, 0.25]);
    }

    #[test]
    fn impact_degenerate_and_errors() {
        let scores = impact_scores(&[0.0, 0.0], &[5.0, 5.0]).unwrap();
        assert!(scores.degenerate);
        assert_eq!(scores.impacts(), vec![0.0, 0.0]);

        assert!(matches!(
            impact_scores(&[-1.0], &[1.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn impact_mitigation_bounds_and_hand_case() {
        assert_eq!(
            impact_mitigation(&[1, 0], &[1, 0], &[0.6, 0.4]).unwrap(),
            1.0
        );
        assert_eq!(
            impact_mitigation(&[0, 1], &[1, 0], &[0.6, 0.4]).unwrap(),
            -1.0
        );
        let m = impact_mitigation(&[1, 0], &[1, 1], &[0.75, 0.25]).unwrap();
        assert!((m - 0.5).abs() < 1e-15);
    }

    #[test]
    fn impact_mitigation_requires_normalized_impacts() {
        assert!(matches!(
            impact_mitigation(&[1], &[1], &[0.5]),
            Err(Error::Domain(_))
        ));
        // Degenerate all-zero impacts are accepted.
        assert_eq!(impact_mitigation(&[1, 0], &[0, 1], &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn flipping_one_prediction_moves_mitigation_by_twice_its_impact() {
        let labels = [1u8, 0, 1, 0];
        let impacts = [0.4, 0.3, 0.2, 0.1];
        let base = impact_mitigation(&[1, 0, 1, 0], &labels, &impacts).unwrap();
        let flipped = impact_mitigation(&[1, 0, 0, 0], &labels, &impacts).unwrap();
        assert!((base - flipped - 2.0 * impacts[2]).abs() < 1e-12);
    }

    fn percentile_fixture() -> Dataset {
        // 20 rows, created time equals the row index scaled to [0,1].
        let n = 20;
        let features = ndarray::Array2::from_shape_fn((n, 2), |(i, j)| {
            if j == 0 {
                i as f32 / (n - 1) as f32
            } else {
                0.5
            }
        });
        let labels: Vec<Label> = (0..n)
            .map(|i| if i % 2 == 0 { Label::Bot } else { Label::Human })
            .collect();
        let mut ds = Dataset::new(
            features,
            labels,
            vec!["created".into(), "x".into()],
        )
        .unwrap();
        ds.created_at_index = Some(0);
        ds
    }

    #[test]
    fn single_band_reproduces_global_f1() {
        let ds = percentile_fixture();
        // A predictor that labels the first 12 (oldest) rows bot.
        let predict = |features: ArrayView2<f64>| -> Result<Vec<u8>> {
            Ok((0..features.nrows()).map(|i| u8::from(i < 12)).collect())
        };
        let bands = percentile_f1(predict, &ds, 100.0, true).unwrap();
        assert_eq!(bands.len(), 1);

        let rows = ds.labeled_indices();
        let preds: Vec<u8> = (0..rows.len()).map(|i| u8::from(i < 12)).collect();
        let labels: Vec<u8> = rows.iter().map(|&i| ds.labels[i].to_byte()).collect();
        let global = classification_metrics(&preds, &labels).unwrap().bot_positive.f1;
        assert!((bands[0].f1 - global).abs() < 1e-15);
    }

    #[test]
    fn disjoint_bands_partition_the_rows() {
        let ds = percentile_fixture();
        // Alternating labels (bot on even rows); predict bot on the first
        // half only. Disjoint 50% bands: rows 0..10 then 10..20.
        let predict = |features: ArrayView2<f64>| -> Result<Vec<u8>> {
            Ok((0..features.nrows()).map(|i| u8::from(i < 10)).collect())
        };
        let bands = percentile_f1(predict, &ds, 50.0, false).unwrap();
        assert_eq!(bands.len(), 2);
        // First band: TP=5, FP=5, FN=0 -> precision 1/2, recall 1, F1 2/3.
        assert!((bands[0].f1 - 2.0 / 3.0).abs() < 1e-12);
        // Second band: no bot predictions at all -> F1 0.
        assert_eq!(bands[1].f1, 0.0);
    }

    #[test]
    fn missing_created_feature_is_domain_error() {
        let mut ds = percentile_fixture();
        ds.created_at_index = None;
        let err = percentile_f1(|_| Ok(vec![]), &ds, 5.0, true).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn band_must_divide_100() {
        let ds = percentile_fixture();
        assert!(percentile_f1(|_| Ok(vec![]), &ds, 7.0, true).is_err());
    }

    #[test]
    fn closeness_exact_match_scores_one_everywhere() {
        let real = crate::data::synth_generate(&SynthConfig {
            n_rows: 60,
            n_features: 5,
            bot_fraction: 0.3,
            cluster_separation: 0.4,
            boolean_feature_fraction: 0.0,
            seed: 9,
        })
        .unwrap();
        // A generator that always emits the human mean: zero weights with
        // biases set to the logit of each mean.
        let config = GanConfig {
            noise_dim: 3,
            hidden_widths: vec![4],
            feature_dim: 5,
            ..GanConfig::with_feature_dim(5)
        };
        let mut generator = GeneratorNet::init(&config, &mut Rng::new(1)).unwrap();
        for w in &mut generator.params.weights {
            w.fill(0.0);
        }
        for b in &mut generator.params.biases {
            b.fill(0.0);
        }
        let humans: Vec<usize> = (0..real.n_rows())
            .filter(|&i| real.labels[i] == Label::Human)
            .collect();
        for j in 0..5 {
            let mean: f64 = humans
                .iter()
                .map(|&i| f64::from(real.features[[i, j]]))
                .sum::<f64>()
                / humans.len() as f64;
            // logit
            let last = generator.params.biases.len() - 1;
            generator.params.biases[last][j] = (mean / (1.0 - mean)).ln();
        }
        let records =
            closeness_analysis(&generator, &real, 0.05, 200, &mut Rng::new(2)).unwrap();
        assert!(records.iter().all(|r| r.close_fraction == 1.0));
    }

    #[test]
    fn closeness_boundary_cases() {
        // mean 0.5, tolerance 0.05: limit is 0.025, so 0.52 is close and
        // 0.53 is not.
        let limit = 0.05 * (0.5f64).abs().max(1e-6);
        assert!((0.52 - 0.5f64).abs() <= limit);
        assert!((0.53 - 0.5f64).abs() > limit);
    }

    #[test]
    fn closeness_monotone_in_tolerance() {
        let real = crate::data::synth_generate(&SynthConfig {
            n_rows: 80,
            n_features: 6,
            bot_fraction: 0.4,
            cluster_separation: 0.6,
            boolean_feature_fraction: 0.2,
            seed: 10,
        })
        .unwrap();
        let config = GanConfig {
            noise_dim: 4,
            hidden_widths: vec![8],
            feature_dim: 6,
            ..GanConfig::with_feature_dim(6)
        };
        let generator = GeneratorNet::init(&config, &mut Rng::new(3)).unwrap();
        let mut last_counts = vec![0usize; 6];
        for step in 0..10 {
            let tolerance = 0.02 * (step + 1) as f64;
            let records =
                closeness_analysis(&generator, &real, tolerance, 150, &mut Rng::new(4)).unwrap();
            let mut counts = vec![0usize; 6];
            for r in &records {
                counts[r.feature_index] = r.close_count;
            }
            for j in 0..6 {
                assert!(counts[j] >= last_counts[j], "tolerance {tolerance}, feature {j}");
            }
            last_counts = counts;
        }
    }

    #[test]
    fn no_human_rows_is_domain_error() {
        let mut real = crate::data::synth_generate(&SynthConfig {
            n_rows: 30,
            n_features: 4,
            bot_fraction: 0.5,
            cluster_separation: 0.5,
            boolean_feature_fraction: 0.0,
            seed: 11,
        })
        .unwrap();
        for l in &mut real.labels {
            *l = Label::Bot;
        }
        let config = GanConfig {
            noise_dim: 3,
            hidden_widths: vec![4],
            feature_dim: 4,
            ..GanConfig::with_feature_dim(4)
        };
        let generator = GeneratorNet::init(&config, &mut Rng::new(5)).unwrap();
        assert!(matches!(
            closeness_analysis(&generator, &real, 0.05, 10, &mut Rng::new(6)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn augmentation_sweep_identity_at_zero_and_sorted_output() {
        let real = crate::data::synth_generate(&SynthConfig {
            n_rows: 50,
            n_features: 4,
            bot_fraction: 0.4,
            cluster_separation: 0.7,
            boolean_feature_fraction: 0.0,
            seed: 12,
        })
        .unwrap();
        let config = GanConfig {
            noise_dim: 3,
            hidden_widths: vec![4],
            feature_dim: 4,
            ..GanConfig::with_feature_dim(4)
        };
        let generator = GeneratorNet::init(&config, &mut Rng::new(7)).unwrap();

        // Trainer stub: "accuracy" is the fraction of rows identical to the
        // original dataset, which detects augmentation exactly.
        let original = real.clone();
        let trainer = |ds: &Dataset, _seed: u64| -> Result<(f64, f64)> {
            let same = (0..ds.n_rows())
                .filter(|&i| {
                    (0..ds.n_features()).all(|j| ds.features[[i, j]] == original.features[[i, j]])
                })
                .count();
            Ok((same as f64 / ds.n_rows() as f64, 0.25))
        };

        let points = augmentation_sweep(
            trainer,
            &real,
            &generator,
            &[1.0, 0.0, 0.5],
            3,
            &Rng::new(8),
        )
        .unwrap();
        assert_eq!(points.len(), 3);
        assert!(points.windows(2).all(|w| w[0].fraction <= w[1].fraction));
        assert_eq!(points[0].fraction, 0.0);
        assert_eq!(points[0].test_accuracy, 1.0);
        assert!(points[2].test_accuracy <= 1e-9);
    }
}
