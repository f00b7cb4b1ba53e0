//! Linear SVM trained in the primal with a stochastic subgradient on the
//! L2-regularized hinge loss.

use ndarray::{Array1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::sigmoid;
use crate::rng::Rng;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SvmHyperparams {
    pub lambda: f64,
    pub passes: usize,
}

impl Default for SvmHyperparams {
    fn default() -> Self {
        SvmHyperparams {
            lambda: 1e-4,
            passes: 20,
        }
    }
}

/// Mean hinge loss plus L2 penalty at the current parameters.
pub fn regularized_hinge_loss(
    weights: &[f64],
    bias: f64,
    features: ArrayView2<f64>,
    labels: &[u8],
    lambda: f64,
) -> f64 {
    let w = Array1::from_vec(weights.to_vec());
    let mut total = 0.0;
    for (row, &label) in features.rows().into_iter().zip(labels) {
        let y = if label == 1 { 1.0 } else { -1.0 };
        let margin = y * (row.dot(&w) + bias);
        total += (1.0 - margin).max(0.0);
    }
    total / labels.len() as f64 + 0.5 * lambda * w.dot(&w)
}

impl SvmModel {
    pub fn fit(
        features: ArrayView2<f64>,
        labels: &[u8],
        hp: SvmHyperparams,
        rng: &mut Rng,
    ) -> Result<SvmModel> {
        let n = features.nrows();
        if n == 0 {
            return Err(Error::Domain("svm needs training rows".into()));
        }
        let d = features.ncols();
        let mut w = Array1::<f64>::zeros(d);
        let mut b = 0.0f64;

        let mut order: Vec<usize> = (0..n).collect();
        let mut step = 0u64;
        for _pass in 0..hp.passes {
            rng.shuffle(&mut order);
            for &i in &order {
                step += 1;
                let eta = 1.0 / (1.0 + hp.lambda * step as f64).sqrt();
                let row = features.row(i);
                let y = if labels[i] == 1 { 1.0 } else { -1.0 };
                let margin = y * (row.dot(&w) + b);
                // Subgradient of hinge + L2: always shrink, push on margin
                // violations.
                w *= 1.0 - eta * hp.lambda;
                if margin < 1.0 {
                    ndarray::Zip::from(&mut w).and(row).for_each(|wj, &xj| {
                        *wj += eta * y * xj;
                    });
                    b += eta * y;
                }
            }
        }
        Ok(SvmModel {
            weights: w.to_vec(),
            bias: b,
        })
    }

    /// Sigmoid-squashed margin, a score in (0,1).
    pub fn scores(&self, features: ArrayView2<f64>) -> Result<Vec<f64>> {
        if features.ncols() != self.weights.len() {
            return Err(Error::Shape(format!(
                "query width {} does not match weight vector length {}",
                features.ncols(),
                self.weights.len()
            )));
        }
        let w = Array1::from_vec(self.weights.clone());
        Ok(features
            .rows()
            .into_iter()
            .map(|row| sigmoid(row.dot(&w) + self.bias))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn zero_weights_positive_bias_scores_point_73() {
        let model = SvmModel {
            weights: vec![0.0, 0.0],
            bias: 1.0,
        };
        let scores = model.scores(array![[0.2, 0.4], [0.9, 0.1]].view()).unwrap();
        for s in scores {
            assert!((s - sigmoid(1.0)).abs() < 1e-15);
            assert!(s >= 0.5); // class 1
        }
    }

    #[test]
    fn separable_data_trains_to_low_loss() {
        let mut rng = Rng::new(3);
        let n = 200;
        let features = Array2::from_shape_fn((n, 4), |(i, j)| {
            let base = if i < n / 2 { 0.2 } else { 0.8 };
            base + 0.05 * rng.normal() + 0.01 * j as f64
        });
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i >= n / 2)).collect();
        let hp = SvmHyperparams::default();
        let initial = regularized_hinge_loss(&[0.0; 4], 0.0, features.view(), &labels, hp.lambda);
        let model = SvmModel::fit(features.view(), &labels, hp, &mut Rng::new(5)).unwrap();
        let trained =
            regularized_hinge_loss(&model.weights, model.bias, features.view(), &labels, hp.lambda);
        assert!(trained <= initial, "trained {trained} vs initial {initial}");
        let scores = model.scores(features.view()).unwrap();
        let correct = scores
            .iter()
            .zip(&labels)
            .filter(|(&s, &y)| u8::from(s >= 0.5) == y)
            .count();
        assert!(correct as f64 / n as f64 > 0.95);
    }
}
