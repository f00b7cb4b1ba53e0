//! Seeded synthetic dataset generator, a desk-scale stand-in for a real
//! bot/human feature dump.
//!
//! Humans and bots are drawn from two truncated-Gaussian clusters in
//! `[0,1]^d` whose means differ by `cluster_separation` along a seeded
//! random direction. A configured fraction of features is thresholded to
//! `{0,1}` booleans (those coordinates get extra weight in the separation
//! direction so they stay informative after thresholding). Raw follower and
//! post counts are log-normal with class-dependent means, and feature 0 is
//! always a numeric "created" column.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

use super::{Dataset, Label};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_rows: usize,
    pub n_features: usize,
    /// Fraction of rows labeled bot, in (0,1). The bot count is exact:
    /// `round(bot_fraction * n_rows)`.
    pub bot_fraction: f64,
    /// Distance between the two cluster means; 0 makes the classes
    /// indistinguishable.
    pub cluster_separation: f64,
    /// Fraction of features thresholded to {0,1}.
    pub boolean_feature_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_rows: 1000,
            n_features: 100,
            bot_fraction: 0.3,
            cluster_separation: 0.8,
            boolean_feature_fraction: 0.2,
            seed: 42,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.n_rows == 0 {
            return Err(Error::Domain("n_rows must be positive".into()));
        }
        if self.n_features < 2 {
            return Err(Error::Domain("n_features must be at least 2".into()));
        }
        if !(self.bot_fraction > 0.0 && self.bot_fraction < 1.0) {
            return Err(Error::Domain(format!(
                "bot_fraction must be in (0,1), got {}",
                self.bot_fraction
            )));
        }
        if self.cluster_separation < 0.0 {
            return Err(Error::Domain("cluster_separation must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.boolean_feature_fraction) {
            return Err(Error::Domain(
                "boolean_feature_fraction must be in [0,1]".into(),
            ));
        }
        Ok(())
    }
}

/// Per-coordinate noise around each cluster mean.
const FEATURE_SD: f64 = 0.06;
/// Extra weight boolean coordinates get in the separation direction, so the
/// class signal survives thresholding.
const BOOLEAN_DIRECTION_GAIN: f64 = 3.0;

fn truncated_gaussian(mean: f64, sd: f64, rng: &mut Rng) -> f64 {
    for _ in 0..100 {
        let x = mean + sd * rng.normal();
        if (0.0..=1.0).contains(&x) {
            return x;
        }
    }
    mean.clamp(0.0, 1.0)
}

pub fn synth_generate(config: &SynthConfig) -> Result<Dataset> {
    config.validate()?;
    let root = Rng::new(config.seed);
    let d = config.n_features;
    let n = config.n_rows;
    let n_bots = (config.bot_fraction * n as f64).round() as usize;
    let n_humans = n - n_bots;

    // Feature 0 ("created") stays numeric; a seeded subset of the rest is
    // boolean.
    let n_bool = (config.boolean_feature_fraction * d as f64).round() as usize;
    let mut candidates: Vec<usize> = (1..d).collect();
    root.derive("bool-select").shuffle(&mut candidates);
    let mut is_boolean = vec![false; d];
    for &j in candidates.iter().take(n_bool.min(d - 1)) {
        is_boolean[j] = true;
    }

    // Seeded separation direction, boolean coordinates amplified, unit norm.
    let mut dir_rng = root.derive("direction");
    let mut direction: Vec<f64> = (0..d).map(|_| dir_rng.normal()).collect();
    for (j, w) in direction.iter_mut().enumerate() {
        if is_boolean[j] {
            *w *= BOOLEAN_DIRECTION_GAIN;
        }
    }
    let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
    for w in &mut direction {
        *w /= norm;
    }

    let half = config.cluster_separation / 2.0;
    let mean_for = |class: Label, j: usize| -> f64 {
        let sign = match class {
            Label::Human => -1.0,
            Label::Bot => 1.0,
            Label::Unlabeled => unreachable!(),
        };
        (0.5 + sign * half * direction[j]).clamp(0.05, 0.95)
    };

    let mut feat_rng = root.derive("features");
    let mut raw_rng = root.derive("raw");
    let mut features = Array2::<f32>::zeros((n, d));
    let mut labels = Vec::with_capacity(n);
    let mut followers = Vec::with_capacity(n);
    let mut posts = Vec::with_capacity(n);

    for i in 0..n {
        let class = if i < n_humans { Label::Human } else { Label::Bot };
        labels.push(class);
        for j in 0..d {
            let latent = truncated_gaussian(mean_for(class, j), FEATURE_SD, &mut feat_rng);
            let value = if is_boolean[j] {
                if latent > 0.5 {
                    1.0
                } else {
                    0.0
                }
            } else {
                latent
            };
            features[[i, j]] = value as f32;
        }
        // Humans tend to have more followers and fewer posts than bots.
        let (ln_f, ln_p) = match class {
            Label::Human => (4.0, 3.0),
            Label::Bot => (2.0, 5.0),
            Label::Unlabeled => unreachable!(),
        };
        followers.push((ln_f + raw_rng.normal()).exp());
        posts.push((ln_p + raw_rng.normal()).exp());
    }

    let feature_names: Vec<String> = (0..d)
        .map(|j| {
            if j == 0 {
                "created".to_string()
            } else if is_boolean[j] {
                format!("bool_{j:03}")
            } else {
                format!("num_{j:03}")
            }
        })
        .collect();

    let mut dataset = Dataset::new(features, labels, feature_names)?;
    dataset.created_at_index = Some(0);
    dataset.followers_raw = Some(followers);
    dataset.posts_raw = Some(posts);
    Ok(dataset)
}
