//! k-nearest-neighbors classifier (Euclidean, brute force).

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub train_features: Vec<f32>,
    pub n_rows: usize,
    pub n_features: usize,
    pub train_labels: Vec<u8>,
}

impl KnnModel {
    pub fn fit(k: usize, features: ArrayView2<f64>, labels: &[u8]) -> Result<KnnModel> {
        if k == 0 {
            return Err(Error::Domain("k must be at least 1".into()));
        }
        if features.nrows() == 0 {
            return Err(Error::Domain("knn needs at least one training row".into()));
        }
        Ok(KnnModel {
            k: k.min(features.nrows()),
            train_features: features.iter().map(|&x| x as f32).collect(),
            n_rows: features.nrows(),
            n_features: features.ncols(),
            train_labels: labels.to_vec(),
        })
    }

    /// Fraction of bot votes among the k nearest training rows.
    pub fn scores(&self, queries: ArrayView2<f64>) -> Result<Vec<f64>> {
        if queries.ncols() != self.n_features {
            return Err(Error::Shape(format!(
                "query width {} does not match training width {}",
                queries.ncols(),
                self.n_features
            )));
        }
        let train = Array2::from_shape_vec(
            (self.n_rows, self.n_features),
            self.train_features.iter().map(|&x| f64::from(x)).collect(),
        )
        .expect("stored shape");
        let train_sq: Array1<f64> = train.map_axis(Axis(1), |row| row.dot(&row));

        // Squared distances via ||q||^2 - 2 q.t + ||t||^2; the query norm is
        // constant per row and irrelevant to the ranking.
        let cross = queries.dot(&train.t());
        let mut out = Vec::with_capacity(queries.nrows());
        let mut scored: Vec<(f64, usize)> = Vec::with_capacity(self.n_rows);
        for q in 0..queries.nrows() {
            scored.clear();
            for t in 0..self.n_rows {
                scored.push((train_sq[t] - 2.0 * cross[[q, t]], t));
            }
            // Ties in distance break toward the lower training index.
            scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let bots = scored[..self.k]
                .iter()
                .filter(|&&(_, t)| self.train_labels[t] == 1)
                .count();
            out.push(bots as f64 / self.k as f64);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn one_nn_memorizes_training_set() {
        let x = array![[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]];
        let y = [0u8, 1, 0, 1];
        let model = KnnModel::fit(1, x.view(), &y).unwrap();
        let scores = model.scores(x.view()).unwrap();
        let preds: Vec<u8> = scores.iter().map(|&s| u8::from(s >= 0.5)).collect();
        assert_eq!(preds, y);
    }

    #[test]
    fn single_bot_row_always_votes_bot() {
        let x = array![[0.3, 0.7]];
        let model = KnnModel::fit(5, x.view(), &[1]).unwrap();
        let queries = array![[0.0, 0.0], [1.0, 1.0]];
        let scores = model.scores(queries.view()).unwrap();
        assert!(scores.iter().all(|&s| s == 1.0));
    }

    #[test]
    fn width_mismatch_rejected() {
        let x = array![[0.0, 0.0]];
        let model = KnnModel::fit(1, x.view(), &[0]).unwrap();
        let bad = array![[0.0, 0.0, 0.0]];
        assert!(matches!(model.scores(bad.view()), Err(Error::Shape(_))));
    }
}
