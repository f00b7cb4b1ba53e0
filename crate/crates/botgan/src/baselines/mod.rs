//! Reference classifiers sharing one train/predict contract: k-nearest
//! neighbors, linear SVM, an MLP on the shared network core, and a random
//! forest.

mod knn;
mod svm;
mod tree;

pub use knn::KnnModel;
pub use svm::{regularized_hinge_loss, SvmHyperparams, SvmModel};
pub use tree::{DecisionTree, ForestHyperparams, Node, RandomForest, TreeHyperparams};

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::nn::{
    adam_step, backward, bce_with_logits, forward, init_mlp, sigmoid, Activation, AdamState,
    LayerSpec, MlpParams,
};
use crate::rng::Rng;

/// Anything that scores feature rows with P(bot) in `[0,1]`. Hard labels
/// use the 0.5 threshold (scores of exactly 0.5 classify as bot).
pub trait Classifier {
    fn predict_scores(&self, features: ArrayView2<f64>) -> Result<Vec<f64>>;

    fn predict(&self, features: ArrayView2<f64>) -> Result<Vec<u8>> {
        Ok(self
            .predict_scores(features)?
            .iter()
            .map(|&s| u8::from(s >= 0.5))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Knn,
    LinearSvm,
    Mlp,
    RandomForest,
}

impl std::str::FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<BaselineKind> {
        match s {
            "knn" => Ok(BaselineKind::Knn),
            "svm" | "linear_svm" => Ok(BaselineKind::LinearSvm),
            "mlp" => Ok(BaselineKind::Mlp),
            "rf" | "random_forest" => Ok(BaselineKind::RandomForest),
            other => Err(Error::Config(format!(
                "unknown baseline kind {other:?} (expected knn, svm, mlp or rf)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineHyperparams {
    pub knn_k: usize,
    pub svm: SvmHyperparams,
    pub mlp_hidden: Vec<usize>,
    pub mlp_epochs: usize,
    pub mlp_batch_size: usize,
    pub mlp_learning_rate: f64,
    pub forest: ForestHyperparams,
}

impl Default for BaselineHyperparams {
    fn default() -> Self {
        BaselineHyperparams {
            knn_k: 5,
            svm: SvmHyperparams::default(),
            mlp_hidden: vec![128, 128],
            mlp_epochs: 50,
            mlp_batch_size: 256,
            mlp_learning_rate: 0.002,
            forest: ForestHyperparams::default(),
        }
    }
}

/// A trained baseline. Prediction is deterministic given the model.
#[derive(Debug, Clone)]
pub enum BaselineModel {
    Knn(KnnModel),
    LinearSvm(SvmModel),
    Mlp(MlpBaseline),
    RandomForest(RandomForest),
}

impl BaselineModel {
    pub fn kind(&self) -> BaselineKind {
        match self {
            BaselineModel::Knn(_) => BaselineKind::Knn,
            BaselineModel::LinearSvm(_) => BaselineKind::LinearSvm,
            BaselineModel::Mlp(_) => BaselineKind::Mlp,
            BaselineModel::RandomForest(_) => BaselineKind::RandomForest,
        }
    }
}

/// MLP classifier head: a dense network with a single logit output.
#[derive(Debug, Clone)]
pub struct MlpBaseline {
    pub params: MlpParams,
}

fn mlp_specs(d: usize, hidden: &[usize]) -> Vec<LayerSpec> {
    let mut dims = vec![d];
    dims.extend(hidden);
    dims.push(1);
    dims.windows(2)
        .enumerate()
        .map(|(i, pair)| {
            let activation = if i + 2 == dims.len() {
                Activation::Identity
            } else {
                Activation::Relu
            };
            LayerSpec::new(pair[0], pair[1], activation)
        })
        .collect()
}

fn train_mlp(
    features: ArrayView2<f64>,
    labels: &[u8],
    hp: &BaselineHyperparams,
    rng: &Rng,
) -> Result<MlpBaseline> {
    let d = features.ncols();
    let mut params = init_mlp(&mlp_specs(d, &hp.mlp_hidden), &mut rng.derive("init"))?;
    let mut state = AdamState::new(&params, hp.mlp_learning_rate);
    let mut shuffle_rng = rng.derive("shuffle");
    let targets: Vec<f64> = labels.iter().map(|&y| f64::from(y)).collect();

    let n = features.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    for _epoch in 0..hp.mlp_epochs {
        shuffle_rng.shuffle(&mut order);
        for chunk in order.chunks(hp.mlp_batch_size) {
            let batch = Array2::from_shape_fn((chunk.len(), d), |(i, j)| features[[chunk[i], j]]);
            let batch_targets: Vec<f64> = chunk.iter().map(|&i| targets[i]).collect();
            let mut unused = Rng::new(0);
            let (logits, cache) = forward(&params, batch.view(), false, 0.0, &mut unused)?;
            let (_, grad) = bce_with_logits(&logits.column(0).to_vec(), &batch_targets)?;
            let grad_matrix =
                Array2::from_shape_fn((chunk.len(), 1), |(i, _)| grad[i]);
            let grads = backward(&params, &cache, grad_matrix.view())?;
            adam_step(&mut params, &grads, &mut state)?;
        }
    }
    Ok(MlpBaseline { params })
}

fn labeled_training_view(data: &Dataset) -> Result<(Array2<f64>, Vec<u8>)> {
    let rows = data.labeled_indices();
    let bots = rows
        .iter()
        .filter(|&&i| data.labels[i] == Label::Bot)
        .count();
    if rows.is_empty() || bots == 0 || bots == rows.len() {
        return Err(Error::Domain(
            "baseline training needs both classes present".into(),
        ));
    }
    let features = data.rows_f64(&rows);
    let labels: Vec<u8> = rows.iter().map(|&i| data.labels[i].to_byte()).collect();
    Ok((features, labels))
}

/// Trains the requested baseline on the labeled rows of `train_data`.
pub fn train_baseline(
    kind: BaselineKind,
    train_data: &Dataset,
    hp: &BaselineHyperparams,
    rng: &Rng,
) -> Result<BaselineModel> {
    let (features, labels) = labeled_training_view(train_data)?;
    Ok(match kind {
        BaselineKind::Knn => {
            BaselineModel::Knn(KnnModel::fit(hp.knn_k, features.view(), &labels)?)
        }
        BaselineKind::LinearSvm => BaselineModel::LinearSvm(SvmModel::fit(
            features.view(),
            &labels,
            hp.svm,
            &mut rng.derive("svm"),
        )?),
        BaselineKind::Mlp => BaselineModel::Mlp(train_mlp(
            features.view(),
            &labels,
            hp,
            &rng.derive("mlp"),
        )?),
        BaselineKind::RandomForest => BaselineModel::RandomForest(RandomForest::fit(
            features.view(),
            &labels,
            hp.forest,
            &rng.derive("forest"),
        )?),
    })
}

impl Classifier for BaselineModel {
    fn predict_scores(&self, features: ArrayView2<f64>) -> Result<Vec<f64>> {
        match self {
            BaselineModel::Knn(m) => m.scores(features),
            BaselineModel::LinearSvm(m) => m.scores(features),
            BaselineModel::Mlp(m) => m.predict_scores(features),
            BaselineModel::RandomForest(m) => m.scores(features),
        }
    }
}

impl Classifier for MlpBaseline {
    fn predict_scores(&self, features: ArrayView2<f64>) -> Result<Vec<f64>> {
        let mut unused = Rng::new(0);
        let (logits, _) = forward(&self.params, features, false, 0.0, &mut unused)?;
        Ok(logits.column(0).iter().map(|&x| sigmoid(x)).collect())
    }
}

impl Classifier for crate::gan::DiscriminatorNet {
    /// Sigmoid of the human/bot logit.
    fn predict_scores(&self, features: ArrayView2<f64>) -> Result<Vec<f64>> {
        Ok(self
            .logits(features)?
            .column(crate::gan::HB)
            .iter()
            .map(|&x| sigmoid(x))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SynthConfig;

    fn separable_dataset(seed: u64) -> Dataset {
        crate::data::synth_generate(&SynthConfig {
            n_rows: 400,
            n_features: 10,
            bot_fraction: 0.4,
            cluster_separation: 0.9,
            boolean_feature_fraction: 0.2,
            seed,
        })
        .unwrap()
    }

    #[test]
    fn all_four_kinds_learn_separable_data() {
        let data = separable_dataset(3);
        let rows = data.labeled_indices();
        let features = data.rows_f64(&rows);
        let targets = data.label_targets(&rows);
        let hp = BaselineHyperparams {
            mlp_epochs: 15,
            forest: ForestHyperparams {
                n_trees: 25,
                ..ForestHyperparams::default()
            },
            ..BaselineHyperparams::default()
        };
        for kind in [
            BaselineKind::Knn,
            BaselineKind::LinearSvm,
            BaselineKind::Mlp,
            BaselineKind::RandomForest,
        ] {
            let model = train_baseline(kind, &data, &hp, &Rng::new(11)).unwrap();
            let preds = model.predict(features.view()).unwrap();
            let correct = preds
                .iter()
                .zip(&targets)
                .filter(|(&p, &t)| f64::from(p) == t)
                .count();
            let acc = correct as f64 / rows.len() as f64;
            assert!(acc >= 0.9, "{kind:?} training accuracy {acc}");
        }
    }

    #[test]
    fn training_is_deterministic_per_kind() {
        let data = separable_dataset(4);
        let rows = data.labeled_indices();
        let features = data.rows_f64(&rows);
        let hp = BaselineHyperparams {
            mlp_epochs: 3,
            forest: ForestHyperparams {
                n_trees: 8,
                ..ForestHyperparams::default()
            },
            ..BaselineHyperparams::default()
        };
        for kind in [
            BaselineKind::Knn,
            BaselineKind::LinearSvm,
            BaselineKind::Mlp,
            BaselineKind::RandomForest,
        ] {
            let a = train_baseline(kind, &data, &hp, &Rng::new(21)).unwrap();
            let b = train_baseline(kind, &data, &hp, &Rng::new(21)).unwrap();
            assert_eq!(
                a.predict_scores(features.view()).unwrap(),
                b.predict_scores(features.view()).unwrap(),
                "{kind:?} not deterministic"
            );
        }
    }

    #[test]
    fn empty_input_empty_output() {
        let data = separable_dataset(5);
        let hp = BaselineHyperparams::default();
        let model = train_baseline(BaselineKind::Knn, &data, &hp, &Rng::new(1)).unwrap();
        let empty = Array2::<f64>::zeros((0, 10));
        assert!(model.predict(empty.view()).unwrap().is_empty());
    }

    #[test]
    fn single_class_data_is_domain_error() {
        let mut data = separable_dataset(6);
        for l in &mut data.labels {
            *l = Label::Human;
        }
        let err = train_baseline(
            BaselineKind::LinearSvm,
            &data,
            &BaselineHyperparams::default(),
            &Rng::new(1),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn kind_parses_from_cli_spellings() {
        use std::str::FromStr;
        assert_eq!(BaselineKind::from_str("knn").unwrap(), BaselineKind::Knn);
        assert_eq!(BaselineKind::from_str("svm").unwrap(), BaselineKind::LinearSvm);
        assert_eq!(BaselineKind::from_str("rf").unwrap(), BaselineKind::RandomForest);
        assert!(BaselineKind::from_str("boost").is_err());
    }
}
