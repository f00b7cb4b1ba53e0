//! Dense-network math: initialization, forward/backward passes with
//! inverted dropout, and the Adam optimizer.
//!
//! All computation is in `f64`. Operations are pure functions of their
//! inputs; randomness enters only through an explicitly passed [`Rng`].

mod loss;

pub use loss::bce_with_logits;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Element-wise activation applied after a layer's affine transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Sigmoid,
    Relu,
    LeakyRelu { slope: f64 },
}

impl Activation {
    pub const DEFAULT_LEAKY_SLOPE: f64 = 0.01;

    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Sigmoid => sigmoid(z),
            Activation::Relu => z.max(0.0),
            Activation::LeakyRelu { slope } => {
                if z > 0.0 {
                    z
                } else {
                    slope * z
                }
            }
        }
    }

    /// Derivative with respect to the pre-activation `z`, given both `z` and
    /// the already-computed activation value `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu { slope } => {
                if z > 0.0 {
                    1.0
                } else {
                    slope
                }
            }
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// One dense layer: dimensions and activation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        LayerSpec {
            in_dim,
            out_dim,
            activation,
        }
    }
}

fn check_chain(specs: &[LayerSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::Shape("network needs at least one layer".into()));
    }
    for spec in specs {
        if spec.in_dim == 0 || spec.out_dim == 0 {
            return Err(Error::Shape(format!(
                "layer dims must be >= 1, got {}x{}",
                spec.in_dim, spec.out_dim
            )));
        }
    }
    for (i, pair) in specs.windows(2).enumerate() {
        if pair[0].out_dim != pair[1].in_dim {
            return Err(Error::Shape(format!(
                "layer {} out_dim {} does not chain into layer {} in_dim {}",
                i,
                pair[0].out_dim,
                i + 1,
                pair[1].in_dim
            )));
        }
    }
    Ok(())
}

/// Weights and biases of a dense network. Weight matrices are
/// `(out_dim, in_dim)` row-major; biases are `(out_dim,)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<LayerSpec>,
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl MlpParams {
    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    /// Total number of scalar parameters.
    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.out_dim * (l.in_dim + 1)).sum()
    }
}

/// Initializes a network: He-scaled normal weights (`sqrt(2/in_dim)`) for
/// relu-family layers, Xavier-scaled (`sqrt(1/in_dim)`) for sigmoid/identity
/// layers, zero biases.
pub fn init_mlp(specs: &[LayerSpec], rng: &mut Rng) -> Result<MlpParams> {
    check_chain(specs)?;
    let mut weights = Vec::with_capacity(specs.len());
    let mut biases = Vec::with_capacity(specs.len());
    for spec in specs {
        let scale = match spec.activation {
            Activation::Relu | Activation::LeakyRelu { .. } => (2.0 / spec.in_dim as f64).sqrt(),
            Activation::Identity | Activation::Sigmoid => (1.0 / spec.in_dim as f64).sqrt(),
        };
        let w = Array2::from_shape_fn((spec.out_dim, spec.in_dim), |_| scale * rng.normal());
        weights.push(w);
        biases.push(Array1::zeros(spec.out_dim));
    }
    Ok(MlpParams {
        layers: specs.to_vec(),
        weights,
        biases,
    })
}

/// Per-batch record of everything `backward` needs: the input actually fed
/// to each layer, pre-activations, post-activations, and the 0/1 dropout
/// masks for layers where dropout was applied.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    layer_inputs: Vec<Array2<f64>>,
    pre_activations: Vec<Array2<f64>>,
    post_activations: Vec<Array2<f64>>,
    masks: Vec<Option<Array2<f64>>>,
    dropout_scale: f64,
}

/// Per-layer parameter gradients plus the gradient with respect to the
/// batch input (used to chain networks, e.g. generator through
/// discriminator).
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weight_grads: Vec<Array2<f64>>,
    pub bias_grads: Vec<Array1<f64>>,
    pub input_grad: Array2<f64>,
}

impl Gradients {
    /// Element-wise sum of two gradient sets over the same parameter shapes.
    pub fn add(&mut self, other: &Gradients) {
        for (a, b) in self.weight_grads.iter_mut().zip(&other.weight_grads) {
            *a += b;
        }
        for (a, b) in self.bias_grads.iter_mut().zip(&other.bias_grads) {
            *a += b;
        }
    }

    /// Scales every parameter gradient by `factor`.
    pub fn scale(&mut self, factor: f64) {
        for g in &mut self.weight_grads {
            *g *= factor;
        }
        for g in &mut self.bias_grads {
            *g *= factor;
        }
    }
}

/// Runs the network on a batch (rows are samples).
///
/// In train mode, inverted dropout is applied to hidden-layer outputs:
/// surviving units are scaled by `1/(1-rate)` so eval mode needs no
/// rescaling. The output layer never gets dropout. `rng` is consumed only
/// when `train_mode` is set and `dropout_rate > 0`.
pub fn forward(
    params: &MlpParams,
    batch: ArrayView2<f64>,
    train_mode: bool,
    dropout_rate: f64,
    rng: &mut Rng,
) -> Result<(Array2<f64>, ForwardCache)> {
    if batch.ncols() != params.input_dim() {
        return Err(Error::Shape(format!(
            "batch width {} does not match first layer in_dim {}",
            batch.ncols(),
            params.input_dim()
        )));
    }
    if !(0.0..=1.0).contains(&dropout_rate) {
        return Err(Error::Domain(format!(
            "dropout_rate must be in [0,1], got {dropout_rate}"
        )));
    }
    if batch.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite value in forward input".into()));
    }

    let n_layers = params.layers.len();
    // With rate == 1 every hidden unit is dropped; the 1/(1-rate) rescale is
    // then moot and the scale is pinned to 0 to avoid inf*0.
    let dropout_scale = if dropout_rate < 1.0 {
        1.0 / (1.0 - dropout_rate)
    } else {
        0.0
    };

    let mut layer_inputs = Vec::with_capacity(n_layers);
    let mut pre_activations = Vec::with_capacity(n_layers);
    let mut post_activations = Vec::with_capacity(n_layers);
    let mut masks = Vec::with_capacity(n_layers);

    let mut current = batch.to_owned();
    for (l, spec) in params.layers.iter().enumerate() {
        let z = current.dot(&params.weights[l].t()) + &params.biases[l];
        let a = z.mapv(|v| spec.activation.apply(v));

        let is_hidden = l + 1 < n_layers;
        let (next, mask) = if train_mode && dropout_rate > 0.0 && is_hidden {
            let mask = Array2::from_shape_fn(a.dim(), |_| {
                if rng.next_f64() < dropout_rate {
                    0.0
                } else {
                    1.0
                }
            });
            (&a * &mask * dropout_scale, Some(mask))
        } else {
            (a.clone(), None)
        };

        layer_inputs.push(current);
        pre_activations.push(z);
        post_activations.push(a);
        masks.push(mask);
        current = next;
    }

    let cache = ForwardCache {
        layer_inputs,
        pre_activations,
        post_activations,
        masks,
        dropout_scale,
    };
    Ok((current, cache))
}

/// Backpropagates `output_grad` (gradient of a scalar loss with respect to
/// the network outputs) through the cached forward pass.
///
/// This is the exact chain rule: any batch-mean reduction is expected to
/// already be folded into `output_grad`, as [`bce_with_logits`] does, so
/// that the returned gradients match finite differences of the scalar loss.
/// Dropout masks recorded in the cache are replayed exactly.
pub fn backward(
    params: &MlpParams,
    cache: &ForwardCache,
    output_grad: ArrayView2<f64>,
) -> Result<Gradients> {
    let n_layers = params.layers.len();
    if cache.layer_inputs.len() != n_layers {
        return Err(Error::Shape(format!(
            "cache holds {} layers, params hold {}",
            cache.layer_inputs.len(),
            n_layers
        )));
    }
    let expected = (cache.layer_inputs[0].nrows(), params.output_dim());
    if output_grad.dim() != expected {
        return Err(Error::Shape(format!(
            "output_grad shape {:?} does not match {:?}",
            output_grad.dim(),
            expected
        )));
    }

    let mut weight_grads = vec![Array2::zeros((0, 0)); n_layers];
    let mut bias_grads = vec![Array1::zeros(0); n_layers];

    let mut grad = output_grad.to_owned();
    for l in (0..n_layers).rev() {
        // Gradient w.r.t. the (possibly dropped) layer output.
        if let Some(mask) = &cache.masks[l] {
            grad = grad * mask * cache.dropout_scale;
        }
        // Through the activation.
        let spec = params.layers[l];
        let mut dz = grad;
        ndarray::Zip::from(&mut dz)
            .and(&cache.pre_activations[l])
            .and(&cache.post_activations[l])
            .for_each(|g, &zv, &av| *g *= spec.activation.derivative(zv, av));
        weight_grads[l] = dz.t().dot(&cache.layer_inputs[l]);
        bias_grads[l] = dz.sum_axis(Axis(0));
        grad = dz.dot(&params.weights[l]);
    }

    Ok(Gradients {
        weight_grads,
        bias_grads,
        input_grad: grad,
    })
}

/// Adam optimizer state: first/second moment accumulators mirroring the
/// parameter shapes, plus the step counter used for bias correction.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub m_weights: Vec<Array2<f64>>,
    pub v_weights: Vec<Array2<f64>>,
    pub m_biases: Vec<Array1<f64>>,
    pub v_biases: Vec<Array1<f64>>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub learning_rate: f64,
}

impl AdamState {
    pub fn new(params: &MlpParams, learning_rate: f64) -> Self {
        AdamState {
            m_weights: params.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            v_weights: params.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            m_biases: params.biases.iter().map(|b| Array1::zeros(b.dim())).collect(),
            v_biases: params.biases.iter().map(|b| Array1::zeros(b.dim())).collect(),
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            learning_rate,
        }
    }
}

/// One Adam update with bias correction:
/// `m <- b1*m + (1-b1)*g`, `v <- b2*v + (1-b2)*g^2`,
/// `theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)`.
pub fn adam_step(params: &mut MlpParams, grads: &Gradients, state: &mut AdamState) -> Result<()> {
    if grads.weight_grads.len() != params.weights.len() {
        return Err(Error::Shape(format!(
            "gradients hold {} layers, params hold {}",
            grads.weight_grads.len(),
            params.weights.len()
        )));
    }
    for (l, (wg, bg)) in grads.weight_grads.iter().zip(&grads.bias_grads).enumerate() {
        if wg.iter().any(|g| !g.is_finite()) || bg.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite gradient in layer {l}"
            )));
        }
    }

    state.t += 1;
    let t = state.t as i32;
    let bias1 = 1.0 - state.beta1.powi(t);
    let bias2 = 1.0 - state.beta2.powi(t);
    let (b1, b2, eps, lr) = (state.beta1, state.beta2, state.epsilon, state.learning_rate);

    let update = |theta: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / bias1;
        let v_hat = *v / bias2;
        *theta -= lr * m_hat / (v_hat.sqrt() + eps);
    };

    for l in 0..params.weights.len() {
        ndarray::Zip::from(&mut params.weights[l])
            .and(&grads.weight_grads[l])
            .and(&mut state.m_weights[l])
            .and(&mut state.v_weights[l])
            .for_each(|theta, &g, m, v| update(theta, g, m, v));
        ndarray::Zip::from(&mut params.biases[l])
            .and(&grads.bias_grads[l])
            .and(&mut state.m_biases[l])
            .and(&mut state.v_biases[l])
            .for_each(|theta, &g, m, v| update(theta, g, m, v));
    }
    Ok(())
}
