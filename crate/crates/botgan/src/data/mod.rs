//! Dataset container, min-max scaling, stratified splitting, the BDF binary
//! format, CSV ingestion, and a seeded synthetic-dataset generator.

mod bdf;
mod csv_import;
mod synth;

pub use bdf::{read_bdf, read_bdf_bytes, write_bdf};
pub use csv_import::{import_csv, import_csv_reader, CsvManifest};
pub use synth::{synth_generate, SynthConfig};

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Account label. Stored on disk as a single byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    Human,
    Bot,
    Unlabeled,
}

impl Label {
    pub fn to_byte(self) -> u8 {
        match self {
            Label::Human => 0,
            Label::Bot => 1,
            Label::Unlabeled => 255,
        }
    }

    pub fn from_byte(b: u8) -> Result<Label> {
        match b {
            0 => Ok(Label::Human),
            1 => Ok(Label::Bot),
            255 => Ok(Label::Unlabeled),
            other => Err(Error::Domain(format!(
                "label byte must be 0, 1 or 255, got {other}"
            ))),
        }
    }

    pub fn is_labeled(self) -> bool {
        self != Label::Unlabeled
    }
}

/// Matrix of scaled account features plus labels and optional raw
/// follower/post counts for impact scoring.
///
/// Features are stored as `f32` (matching the on-disk format); numeric code
/// widens batches to `f64` via [`Dataset::rows_f64`].
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Array2<f32>,
    pub labels: Vec<Label>,
    pub feature_names: Vec<String>,
    /// Index of the scaled account-creation-time feature, when known.
    pub created_at_index: Option<usize>,
    pub followers_raw: Option<Vec<f64>>,
    pub posts_raw: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(
        features: Array2<f32>,
        labels: Vec<Label>,
        feature_names: Vec<String>,
    ) -> Result<Dataset> {
        let ds = Dataset {
            features,
            labels,
            feature_names,
            created_at_index: None,
            followers_raw: None,
            posts_raw: None,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        let (n, d) = self.features.dim();
        if self.labels.len() != n {
            return Err(Error::Shape(format!(
                "{} labels for {} rows",
                self.labels.len(),
                n
            )));
        }
        if self.feature_names.len() != d {
            return Err(Error::Shape(format!(
                "{} feature names for {} columns",
                self.feature_names.len(),
                d
            )));
        }
        if let Some(idx) = self.created_at_index {
            if idx >= d {
                return Err(Error::Shape(format!(
                    "created_at_index {idx} out of range for {d} features"
                )));
            }
        }
        for (name, raw) in [("followers_raw", &self.followers_raw), ("posts_raw", &self.posts_raw)]
        {
            if let Some(v) = raw {
                if v.len() != n {
                    return Err(Error::Shape(format!(
                        "{name} length {} for {} rows",
                        v.len(),
                        n
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    /// Indices of rows with a human or bot label.
    pub fn labeled_indices(&self) -> Vec<usize> {
        (0..self.n_rows())
            .filter(|&i| self.labels[i].is_labeled())
            .collect()
    }

    /// Gathers `indices` into an `f64` batch for network code.
    pub fn rows_f64(&self, indices: &[usize]) -> Array2<f64> {
        let d = self.n_features();
        Array2::from_shape_fn((indices.len(), d), |(i, j)| {
            f64::from(self.features[[indices[i], j]])
        })
    }

    /// Label bytes (0/1) for `indices` as f64 targets. Unlabeled rows are a
    /// caller bug here.
    pub fn label_targets(&self, indices: &[usize]) -> Vec<f64> {
        indices
            .iter()
            .map(|&i| match self.labels[i] {
                Label::Human => 0.0,
                Label::Bot => 1.0,
                Label::Unlabeled => panic!("label_targets on unlabeled row {i}"),
            })
            .collect()
    }

    /// Copies a subset of rows into a new dataset (raw columns follow).
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let d = self.n_features();
        let features = Array2::from_shape_fn((indices.len(), d), |(i, j)| {
            self.features[[indices[i], j]]
        });
        Dataset {
            features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            created_at_index: self.created_at_index,
            followers_raw: self
                .followers_raw
                .as_ref()
                .map(|v| indices.iter().map(|&i| v[i]).collect()),
            posts_raw: self
                .posts_raw
                .as_ref()
                .map(|v| indices.iter().map(|&i| v[i]).collect()),
        }
    }

    pub fn feature_view(&self) -> ArrayView2<'_, f32> {
        self.features.view()
    }
}

/// Per-feature min/max observed before scaling, for inverse mapping.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleRecord {
    pub mins: Vec<f32>,
    pub maxs: Vec<f32>,
}

/// Maps every feature through `(x - min) / (max - min)` into `[0,1]`.
/// Constant features map to 0.0.
pub fn minmax_scale(dataset: &Dataset) -> Result<(Dataset, ScaleRecord)> {
    let (n, d) = dataset.features.dim();
    if dataset.features.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite feature value".into()));
    }
    let mut mins = vec![f32::INFINITY; d];
    let mut maxs = vec![f32::NEG_INFINITY; d];
    for row in dataset.features.rows() {
        for (j, &x) in row.iter().enumerate() {
            mins[j] = mins[j].min(x);
            maxs[j] = maxs[j].max(x);
        }
    }
    if n == 0 {
        mins.fill(0.0);
        maxs.fill(0.0);
    }
    let mut scaled = dataset.clone();
    for (j, (&lo, &hi)) in mins.iter().zip(&maxs).enumerate() {
        let range = hi - lo;
        for i in 0..n {
            let x = scaled.features[[i, j]];
            scaled.features[[i, j]] = if range > 0.0 { (x - lo) / range } else { 0.0 };
        }
    }
    Ok((scaled, ScaleRecord { mins, maxs }))
}

/// Row indices of a stratified 80/10/10 split over the labeled rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Splits the labeled rows 80/10/10, stratified by class so each split
/// preserves the human/bot ratio to within one row. Unlabeled rows are
/// excluded. Shuffling is seeded; indices within each split come back
/// sorted.
pub fn split_80_10_10(dataset: &Dataset, rng: &mut Rng) -> Result<SplitIndices> {
    let labeled = dataset.labeled_indices();
    if labeled.len() < 10 {
        return Err(Error::Domain(format!(
            "need at least 10 labeled rows to split, have {}",
            labeled.len()
        )));
    }

    let mut split = SplitIndices {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
    };
    for class in [Label::Human, Label::Bot] {
        let mut idx: Vec<usize> = labeled
            .iter()
            .copied()
            .filter(|&i| dataset.labels[i] == class)
            .collect();
        rng.shuffle(&mut idx);
        let n = idx.len();
        let n_test = ((n as f64) * 0.1).round() as usize;
        let n_val = n_test;
        split.test.extend(&idx[..n_test]);
        split.validation.extend(&idx[n_test..n_test + n_val]);
        split.train.extend(&idx[n_test + n_val..]);
    }
    split.train.sort_unstable();
    split.validation.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}
