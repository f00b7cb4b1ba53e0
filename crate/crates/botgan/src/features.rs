//! Information-gain ranking of features and top-k selection.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};

/// Per-feature information gain in bits, with a descending ordering.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureRanking {
    /// Information gain in bits per feature, indexed by feature.
    pub scores: Vec<f64>,
    /// Feature indices sorted by descending score (ties: lower index first).
    pub order: Vec<usize>,
    /// Discretization granularity used for numerical features.
    pub bin_count: usize,
}

pub const DEFAULT_BINS: usize = 10;

fn entropy_bits(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum()
}

/// Bin assignment for a feature value. Features taking only values {0,1}
/// are treated as 2-bin booleans; everything else is discretized into
/// `bins` equal-width bins on [0,1] (values outside are clamped).
fn bin_of(value: f32, boolean: bool, bins: usize) -> usize {
    if boolean {
        usize::from(value == 1.0)
    } else {
        let scaled = (f64::from(value).clamp(0.0, 1.0) * bins as f64) as usize;
        scaled.min(bins - 1)
    }
}

fn is_boolean_column(dataset: &Dataset, feature: usize, rows: &[usize]) -> bool {
    rows.iter().all(|&i| {
        let x = dataset.features[[i, feature]];
        x == 0.0 || x == 1.0
    })
}

/// Ranks every feature by `IG(f) = H(Y) - sum_b p(b) H(Y|b)` with base-2
/// logarithms, computed over the labeled rows only.
pub fn information_gain(dataset: &Dataset, bins: usize) -> Result<FeatureRanking> {
    if bins < 2 {
        return Err(Error::Domain(format!("bins must be >= 2, got {bins}")));
    }
    let rows = dataset.labeled_indices();
    if rows.len() < 2 {
        return Err(Error::Domain(format!(
            "information gain needs at least 2 labeled rows, have {}",
            rows.len()
        )));
    }
    let n_bots = rows
        .iter()
        .filter(|&&i| dataset.labels[i] == Label::Bot)
        .count();
    if n_bots == 0 || n_bots == rows.len() {
        return Err(Error::Domain(
            "information gain needs both classes present; labels are single-class".into(),
        ));
    }

    let label_entropy = entropy_bits(&[n_bots, rows.len() - n_bots], rows.len());
    let d = dataset.n_features();
    let mut scores = Vec::with_capacity(d);
    for f in 0..d {
        let boolean = is_boolean_column(dataset, f, &rows);
        let n_bins = if boolean { 2 } else { bins };
        // counts[b] = (#bot in bin b, #human in bin b)
        let mut counts = vec![[0usize; 2]; n_bins];
        for &i in &rows {
            let b = bin_of(dataset.features[[i, f]], boolean, bins);
            let class = usize::from(dataset.labels[i] == Label::Bot);
            counts[b][class] += 1;
        }
        let mut conditional = 0.0;
        for bin in &counts {
            let bin_total = bin[0] + bin[1];
            conditional +=
                (bin_total as f64 / rows.len() as f64) * entropy_bits(bin, bin_total);
        }
        scores.push(label_entropy - conditional);
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("entropies are finite")
            .then(a.cmp(&b))
    });
    Ok(FeatureRanking {
        scores,
        order,
        bin_count: bins,
    })
}

/// Returns a dataset holding only the top-k ranked features, columns and
/// names reordered by rank. If the creation-time feature is not selected,
/// `created_at_index` comes back `None`.
pub fn select_top_k(dataset: &Dataset, ranking: &FeatureRanking, k: usize) -> Result<Dataset> {
    let d = dataset.n_features();
    if k == 0 || k > d {
        return Err(Error::Domain(format!(
            "k must be in 1..={d}, got {k}"
        )));
    }
    if ranking.order.len() != d {
        return Err(Error::Shape(format!(
            "ranking covers {} features, dataset has {d}",
            ranking.order.len()
        )));
    }
    let selected = &ranking.order[..k];
    let features = ndarray::Array2::from_shape_fn((dataset.n_rows(), k), |(i, j)| {
        dataset.features[[i, selected[j]]]
    });
    let feature_names = selected
        .iter()
        .map(|&f| dataset.feature_names[f].clone())
        .collect();
    let created_at_index = dataset
        .created_at_index
        .and_then(|old| selected.iter().position(|&f| f == old));
    Ok(Dataset {
        features,
        labels: dataset.labels.clone(),
        feature_names,
        created_at_index,
        followers_raw: dataset.followers_raw.clone(),
        posts_raw: dataset.posts_raw.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn dataset(features: Array2<f32>, label_bytes: &[u8]) -> Dataset {
        let labels = label_bytes
            .iter()
            .map(|&b| Label::from_byte(b).unwrap())
            .collect();
        let d = features.ncols();
        Dataset::new(features, labels, (0..d).map(|j| format!("f{j}")).collect()).unwrap()
    }

    #[test]
    fn perfectly_informative_boolean_is_one_bit() {
        let ds = dataset(array![[1.0], [1.0], [0.0], [0.0]], &[1, 1, 0, 0]);
        let ranking = information_gain(&ds, DEFAULT_BINS).unwrap();
        assert!((ranking.scores[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn independent_boolean_is_zero_bits() {
        let ds = dataset(array![[1.0], [1.0], [0.0], [0.0]], &[1, 0, 1, 0]);
        let ranking = information_gain(&ds, DEFAULT_BINS).unwrap();
        assert!(ranking.scores[0].abs() < 1e-15);
    }

    #[test]
    fn single_class_labels_rejected() {
        let ds = dataset(array![[0.1], [0.9]], &[1, 1]);
        assert!(matches!(
            information_gain(&ds, DEFAULT_BINS),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn scores_bounded_by_label_entropy() {
        let mut rng = crate::rng::Rng::new(77);
        let n = 200;
        let features = Array2::from_shape_fn((n, 8), |_| rng.next_f64() as f32);
        let label_bytes: Vec<u8> = (0..n).map(|_| (rng.next_f64() < 0.3) as u8).collect();
        let ds = dataset(features, &label_bytes);
        let n_bots = label_bytes.iter().filter(|&&b| b == 1).count();
        let h = entropy_bits(&[n_bots, n - n_bots], n);
        let ranking = information_gain(&ds, DEFAULT_BINS).unwrap();
        for &score in &ranking.scores {
            assert!(score >= -1e-12 && score <= h + 1e-12, "score {score} vs H {h}");
        }
    }

    #[test]
    fn ranking_invariant_under_bin_preserving_rescale() {
        let mut rng = crate::rng::Rng::new(5);
        let n = 300;
        let features = Array2::from_shape_fn((n, 4), |_| rng.next_f64() as f32);
        let label_bytes: Vec<u8> = (0..n)
            .map(|i| u8::from(features[[i, 2]] > 0.5 && rng.next_f64() < 0.9))
            .collect();
        let ds = dataset(features.clone(), &label_bytes);
        let base = information_gain(&ds, DEFAULT_BINS).unwrap();

        // Snap every value to its bin midpoint: bin assignments (and thus
        // IG) must not move.
        let snapped = features.mapv(|x| {
            let b = bin_of(x, false, DEFAULT_BINS);
            (b as f32 + 0.5) / DEFAULT_BINS as f32
        });
        let ds2 = dataset(snapped, &label_bytes);
        let snapped_ranking = information_gain(&ds2, DEFAULT_BINS).unwrap();
        assert_eq!(base.order, snapped_ranking.order);
        for (a, b) in base.scores.iter().zip(&snapped_ranking.scores) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ties_break_toward_lower_index() {
        // Two identical features tie exactly.
        let ds = dataset(
            array![[1.0, 1.0], [1.0, 1.0], [0.0, 0.0], [0.0, 0.0]],
            &[1, 1, 0, 0],
        );
        let ranking = information_gain(&ds, DEFAULT_BINS).unwrap();
        assert_eq!(ranking.order, vec![0, 1]);
    }

    #[test]
    fn select_top_k_reorders_and_remaps_created() {
        let mut ds = dataset(
            array![
                [0.0, 1.0, 0.3],
                [0.1, 1.0, 0.8],
                [0.9, 0.0, 0.2],
                [1.0, 0.0, 0.9]
            ],
            &[1, 1, 0, 0],
        );
        ds.created_at_index = Some(0);
        let ranking = information_gain(&ds, DEFAULT_BINS).unwrap();
        let top2 = select_top_k(&ds, &ranking, 2).unwrap();
        assert_eq!(top2.n_features(), 2);
        assert_eq!(top2.feature_names[0], format!("f{}", ranking.order[0]));
        // Feature 0 is informative here, so it survives and is remapped.
        let pos = ranking.order[..2].iter().position(|&f| f == 0);
        assert_eq!(top2.created_at_index, pos);

        let full = select_top_k(&ds, &ranking, 3).unwrap();
        assert_eq!(full.n_features(), 3);

        assert!(select_top_k(&ds, &ranking, 0).is_err());
        assert!(select_top_k(&ds, &ranking, 4).is_err());
    }

    #[test]
    fn select_top_k_drops_created_when_excluded() {
        // Make feature 0 useless so it ranks last.
        let mut ds = dataset(
            array![
                [0.5, 1.0, 1.0],
                [0.5, 1.0, 1.0],
                [0.5, 0.0, 0.0],
                [0.5, 0.0, 0.0]
            ],
            &[1, 1, 0, 0],
        );
        ds.created_at_index = Some(0);
        let ranking = information_gain(&ds, DEFAULT_BINS).unwrap();
        let top2 = select_top_k(&ds, &ranking, 2).unwrap();
        assert_eq!(top2.created_at_index, None);
    }
}
