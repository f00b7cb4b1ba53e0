//! Conventional GAN training: a two-head discriminator that classifies
//! human-vs-bot and real-vs-fake, an unconditional generator emitting
//! feature vectors plus a label unit, generator-based data augmentation,
//! and mode-collapse monitoring.
//!
//! Discriminator logit columns: column [`HB`] is the human/bot head
//! (bot = 1), column [`RF`] is the real/fake head (real = 1). The generator
//! maps noise to `d + 1` sigmoid outputs: `d` features in `[0,1]` plus a
//! label unit whose rounding assigns a synthetic human/bot label.
//!
//! Dropout regularization applies to the discriminator's hidden layers
//! during its own optimization steps; the generator trains without dropout
//! and sees an eval-mode discriminator during its step.

use ndarray::{s, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::nn::{
    adam_step, backward, bce_with_logits, forward, init_mlp, Activation, AdamState, LayerSpec,
    MlpParams,
};
use crate::rng::Rng;

/// Discriminator logit column for the human/bot head (bot = 1).
pub const HB: usize = 0;
/// Discriminator logit column for the real/fake head (real = 1).
pub const RF: usize = 1;

/// Number of generated samples scored per epoch for the bot/human ratio.
pub const PROBE_SIZE: usize = 1000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GanConfig {
    pub noise_dim: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub dropout_rate: f64,
    pub hidden_widths: Vec<usize>,
    /// Width of the (top-k selected) feature vectors.
    pub feature_dim: usize,
}

impl GanConfig {
    /// Grid-search winners: noise 100, lr 0.002, batch 256, 50 epochs,
    /// dropout 0.5, three linear layers.
    pub fn with_feature_dim(feature_dim: usize) -> Self {
        GanConfig {
            noise_dim: 100,
            learning_rate: 0.002,
            batch_size: 256,
            epochs: 50,
            dropout_rate: 0.5,
            hidden_widths: vec![128, 128],
            feature_dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.noise_dim == 0
            || self.batch_size == 0
            || self.feature_dim == 0
            || self.hidden_widths.contains(&0)
        {
            return Err(Error::Config("GAN dimensions must all be positive".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.dropout_rate) {
            return Err(Error::Config("dropout rate must be in [0,1]".into()));
        }
        Ok(())
    }

    fn generator_specs(&self) -> Vec<LayerSpec> {
        let mut dims = vec![self.noise_dim];
        dims.extend(&self.hidden_widths);
        dims.push(self.feature_dim + 1);
        specs_from_dims(&dims, Activation::Sigmoid)
    }

    fn discriminator_specs(&self) -> Vec<LayerSpec> {
        let mut dims = vec![self.feature_dim];
        dims.extend(&self.hidden_widths);
        dims.push(2);
        specs_from_dims(&dims, Activation::Identity)
    }
}

fn specs_from_dims(dims: &[usize], output_activation: Activation) -> Vec<LayerSpec> {
    dims.windows(2)
        .enumerate()
        .map(|(i, pair)| {
            let activation = if i + 2 == dims.len() {
                output_activation
            } else {
                Activation::Relu
            };
            LayerSpec::new(pair[0], pair[1], activation)
        })
        .collect()
}

/// Generator network: noise to `feature_dim + 1` sigmoid outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorNet {
    pub params: MlpParams,
    pub feature_dim: usize,
}

impl GeneratorNet {
    pub fn init(config: &GanConfig, rng: &mut Rng) -> Result<GeneratorNet> {
        Ok(GeneratorNet {
            params: init_mlp(&config.generator_specs(), rng)?,
            feature_dim: config.feature_dim,
        })
    }

    pub fn noise_dim(&self) -> usize {
        self.params.input_dim()
    }

    /// Noise batch of shape `(n, noise_dim)`, standard normal entries.
    pub fn sample_noise(&self, n: usize, rng: &mut Rng) -> Array2<f64> {
        Array2::from_shape_fn((n, self.noise_dim()), |_| rng.normal())
    }
}

/// Two-head discriminator: feature vector to `[hb, rf]` logits.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatorNet {
    pub params: MlpParams,
}

impl DiscriminatorNet {
    pub fn init(config: &GanConfig, rng: &mut Rng) -> Result<DiscriminatorNet> {
        Ok(DiscriminatorNet {
            params: init_mlp(&config.discriminator_specs(), rng)?,
        })
    }

    pub fn feature_dim(&self) -> usize {
        self.params.input_dim()
    }

    /// Eval-mode logits for a batch, one `[hb, rf]` row per sample.
    pub fn logits(&self, batch: ArrayView2<f64>) -> Result<Array2<f64>> {
        let mut unused = Rng::new(0);
        let (out, _) = forward(&self.params, batch, false, 0.0, &mut unused)?;
        Ok(out)
    }

    /// Hard human/bot decisions (bot = 1) at threshold 0.5.
    pub fn predict_hb(&self, batch: ArrayView2<f64>) -> Result<Vec<u8>> {
        Ok(self
            .logits(batch)?
            .column(HB)
            .iter()
            .map(|&logit| u8::from(logit > 0.0))
            .collect())
    }

    /// Human/bot accuracy over the labeled rows of `data`.
    pub fn hb_accuracy(&self, data: &Dataset) -> Result<f64> {
        let rows = data.labeled_indices();
        if rows.is_empty() {
            return Err(Error::Domain("no labeled rows to evaluate".into()));
        }
        let preds = self.predict_hb(data.rows_f64(&rows).view())?;
        let targets = data.label_targets(&rows);
        let correct = preds
            .iter()
            .zip(&targets)
            .filter(|(&p, &t)| f64::from(p) == t)
            .count();
        Ok(correct as f64 / rows.len() as f64)
    }
}

/// Bot-to-human ratio of a generated probe. The all-bot case is a flagged
/// value rather than a raw infinity so logs and reports stay explicit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ratio {
    Finite(f64),
    /// No sample was classified human.
    Infinite,
}

impl Ratio {
    pub fn is_infinite(self) -> bool {
        matches!(self, Ratio::Infinite)
    }

    /// True when the ratio reaches `threshold` (the flagged value always
    /// does).
    pub fn at_least(self, threshold: f64) -> bool {
        match self {
            Ratio::Finite(r) => r >= threshold,
            Ratio::Infinite => true,
        }
    }
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Ratio::Finite(r) => write!(f, "{r}"),
            Ratio::Infinite => write!(f, "inf"),
        }
    }
}

/// One completed epoch of conventional GAN training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub d_loss: f64,
    pub g_loss: f64,
    pub bot_human_ratio: Ratio,
    pub hb_validation_accuracy: f64,
}

/// Per-epoch training trace.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainLog {
    pub epochs: Vec<EpochRecord>,
}

/// Trained generator + discriminator with their config and training trace.
/// `discriminator` is the best-performing snapshot by validation human/bot
/// accuracy (ties keep the later, more-trained epoch); `generator` is the
/// final one.
#[derive(Debug, Clone)]
pub struct GanBundle {
    pub generator: GeneratorNet,
    pub discriminator: DiscriminatorNet,
    pub config: GanConfig,
    pub log: TrainLog,
    pub seed: u64,
}

fn check_two_classes(data: &Dataset) -> Result<()> {
    let labeled = data.labeled_indices();
    let bots = labeled
        .iter()
        .filter(|&&i| data.labels[i] == Label::Bot)
        .count();
    if labeled.is_empty() || bots == 0 || bots == labeled.len() {
        return Err(Error::Domain(
            "training data must contain both human and bot rows".into(),
        ));
    }
    Ok(())
}

/// Splits generator output into features (first `d` columns) and label
/// units (last column).
fn split_generated(outputs: &Array2<f64>) -> (Array2<f64>, Vec<f64>) {
    let d = outputs.ncols() - 1;
    let features = outputs.slice(s![.., ..d]).to_owned();
    let label_units = outputs.column(d).to_vec();
    (features, label_units)
}

/// Draws `n` samples from the generator: features in `[0,1]` and label
/// units in `(0,1)`. Deterministic given the rng state.
pub fn generate_samples(
    generator: &GeneratorNet,
    n: usize,
    rng: &mut Rng,
) -> Result<(Array2<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::Domain("cannot generate 0 samples".into()));
    }
    let z = generator.sample_noise(n, rng);
    let mut unused = Rng::new(0);
    let (outputs, _) = forward(&generator.params, z.view(), false, 0.0, &mut unused)?;
    Ok(split_generated(&outputs))
}

/// Ratio of hb-classified bots to hb-classified humans among `samples`.
pub fn mode_collapse_ratio(
    discriminator: &DiscriminatorNet,
    samples: ArrayView2<f64>,
) -> Result<Ratio> {
    if samples.nrows() == 0 {
        return Err(Error::Domain("mode_collapse_ratio on empty sample set".into()));
    }
    let preds = discriminator.predict_hb(samples)?;
    let bots = preds.iter().filter(|&&p| p == 1).count();
    let humans = preds.len() - bots;
    if humans == 0 {
        Ok(Ratio::Infinite)
    } else {
        Ok(Ratio::Finite(bots as f64 / humans as f64))
    }
}

/// First epoch index that begins `patience` consecutive epochs with a
/// bot/human ratio at or above `threshold`, if any.
pub fn detect_mode_collapse(log: &TrainLog, threshold: f64, patience: usize) -> Option<usize> {
    if patience == 0 {
        return None;
    }
    let mut run_start = None;
    let mut run_len = 0usize;
    for (epoch, record) in log.epochs.iter().enumerate() {
        if record.bot_human_ratio.at_least(threshold) {
            if run_len == 0 {
                run_start = Some(epoch);
            }
            run_len += 1;
            if run_len >= patience {
                return run_start;
            }
        } else {
            run_len = 0;
            run_start = None;
        }
    }
    None
}

/// Internal label targets for a real batch plus the round(label-unit)
/// targets for a generated batch.
fn rounded(label_units: &[f64]) -> Vec<f64> {
    label_units.iter().map(|&l| l.round()).collect()
}

/// One discriminator Adam update on a real batch and a generated batch:
/// hb BCE on real labels, hb BCE on generated samples against their rounded
/// label units, and rf BCE over the combined batch (real -> 1, fake -> 0).
/// Returns the summed loss.
#[allow(clippy::too_many_arguments)]
pub(crate) fn conventional_discriminator_step(
    disc: &mut DiscriminatorNet,
    state: &mut AdamState,
    real: ArrayView2<f64>,
    real_targets: &[f64],
    fake: ArrayView2<f64>,
    fake_label_targets: &[f64],
    dropout_rate: f64,
    dropout_rng: &mut Rng,
) -> Result<f64> {
    let n_real = real.nrows();
    let n_fake = fake.nrows();

    let (logits_real, cache_real) =
        forward(&disc.params, real, true, dropout_rate, dropout_rng)?;
    let (logits_fake, cache_fake) =
        forward(&disc.params, fake, true, dropout_rate, dropout_rng)?;

    let (hb_real_loss, hb_real_grad) =
        bce_with_logits(&logits_real.column(HB).to_vec(), real_targets)?;
    let (hb_fake_loss, hb_fake_grad) =
        bce_with_logits(&logits_fake.column(HB).to_vec(), fake_label_targets)?;

    let mut rf_logits = logits_real.column(RF).to_vec();
    rf_logits.extend(logits_fake.column(RF).iter());
    let mut rf_targets = vec![1.0; n_real];
    rf_targets.extend(std::iter::repeat_n(0.0, n_fake));
    let (rf_loss, rf_grad) = bce_with_logits(&rf_logits, &rf_targets)?;

    let mut grad_real = Array2::zeros((n_real, 2));
    let mut grad_fake = Array2::zeros((n_fake, 2));
    for i in 0..n_real {
        grad_real[[i, HB]] = hb_real_grad[i];
        grad_real[[i, RF]] = rf_grad[i];
    }
    for i in 0..n_fake {
        grad_fake[[i, HB]] = hb_fake_grad[i];
        grad_fake[[i, RF]] = rf_grad[n_real + i];
    }

    let mut grads = backward(&disc.params, &cache_real, grad_real.view())?;
    let fake_grads = backward(&disc.params, &cache_fake, grad_fake.view())?;
    grads.add(&fake_grads);
    adam_step(&mut disc.params, &grads, state)?;

    Ok(hb_real_loss + hb_fake_loss + rf_loss)
}

/// One generator Adam update against a single discriminator:
/// `BCE(rf(G(z)), 1) + BCE(hb(G(z)), round(label unit))`, the rounded label
/// units treated as constants. Returns the summed loss.
fn generator_step(
    generator: &mut GeneratorNet,
    state: &mut AdamState,
    disc: &DiscriminatorNet,
    batch_size: usize,
    noise_rng: &mut Rng,
) -> Result<f64> {
    let z = generator.sample_noise(batch_size, noise_rng);
    let mut unused = Rng::new(0);
    let (outputs, gen_cache) = forward(&generator.params, z.view(), false, 0.0, &mut unused)?;
    let (features, label_units) = split_generated(&outputs);

    let (logits, disc_cache) = forward(&disc.params, features.view(), false, 0.0, &mut unused)?;
    let (rf_loss, rf_grad) = bce_with_logits(&logits.column(RF).to_vec(), &vec![1.0; batch_size])?;
    let (hb_loss, hb_grad) = bce_with_logits(&logits.column(HB).to_vec(), &rounded(&label_units))?;

    let mut disc_out_grad = Array2::zeros((batch_size, 2));
    for i in 0..batch_size {
        disc_out_grad[[i, HB]] = hb_grad[i];
        disc_out_grad[[i, RF]] = rf_grad[i];
    }
    // Discriminator parameters stay frozen here; only its input gradient
    // is needed to reach the generator.
    let through = backward(&disc.params, &disc_cache, disc_out_grad.view())?;

    // The label unit column receives no gradient: round(l) is a constant
    // target.
    let d = generator.feature_dim;
    let mut gen_out_grad = Array2::zeros((batch_size, d + 1));
    gen_out_grad
        .slice_mut(s![.., ..d])
        .assign(&through.input_grad);

    let gen_grads = backward(&generator.params, &gen_cache, gen_out_grad.view())?;
    adam_step(&mut generator.params, &gen_grads, state)?;
    Ok(rf_loss + hb_loss)
}

/// Trains the conventional two-head GAN. The returned bundle's
/// discriminator is the best validation-accuracy snapshot (D*).
pub fn train_conventional(
    train_data: &Dataset,
    val_data: &Dataset,
    config: &GanConfig,
    rng: &Rng,
) -> Result<GanBundle> {
    config.validate()?;
    check_two_classes(train_data)?;
    if train_data.n_features() != config.feature_dim {
        return Err(Error::Shape(format!(
            "data has {} features but config.feature_dim is {}",
            train_data.n_features(),
            config.feature_dim
        )));
    }

    let mut generator = GeneratorNet::init(config, &mut rng.derive("init/generator"))?;
    let mut discriminator = DiscriminatorNet::init(config, &mut rng.derive("init/discriminator/0"))?;
    let mut gen_state = AdamState::new(&generator.params, config.learning_rate);
    let mut disc_state = AdamState::new(&discriminator.params, config.learning_rate);

    let mut shuffle_rng = rng.derive("shuffle");
    let mut noise_rng = rng.derive("noise");
    let mut dropout_rng = rng.derive("dropout/discriminator/0");
    let probe_z = generator.sample_noise(PROBE_SIZE, &mut rng.derive("probe"));

    let labeled = train_data.labeled_indices();
    let mut log = TrainLog::default();
    let mut best: Option<(f64, DiscriminatorNet)> = None;

    for _epoch in 0..config.epochs {
        let mut order = labeled.clone();
        shuffle_rng.shuffle(&mut order);

        let mut d_loss_sum = 0.0;
        let mut g_loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let real = train_data.rows_f64(chunk);
            let real_targets = train_data.label_targets(chunk);

            let z = generator.sample_noise(chunk.len(), &mut noise_rng);
            let mut unused = Rng::new(0);
            let (fake_out, _) = forward(&generator.params, z.view(), false, 0.0, &mut unused)?;
            let (fake_features, fake_label_units) = split_generated(&fake_out);

            d_loss_sum += conventional_discriminator_step(
                &mut discriminator,
                &mut disc_state,
                real.view(),
                &real_targets,
                fake_features.view(),
                &rounded(&fake_label_units),
                config.dropout_rate,
                &mut dropout_rng,
            )?;
            g_loss_sum += generator_step(
                &mut generator,
                &mut gen_state,
                &discriminator,
                chunk.len(),
                &mut noise_rng,
            )?;
            batches += 1;
        }

        let mut unused = Rng::new(0);
        let (probe_out, _) = forward(&generator.params, probe_z.view(), false, 0.0, &mut unused)?;
        let (probe_features, _) = split_generated(&probe_out);
        let ratio = mode_collapse_ratio(&discriminator, probe_features.view())?;
        let val_acc = discriminator.hb_accuracy(val_data)?;

        // Later epochs win ties so D* is the most-trained snapshot at peak
        // validation accuracy.
        if best.as_ref().is_none_or(|(acc, _)| val_acc >= *acc) {
            best = Some((val_acc, discriminator.clone()));
        }

        log.epochs.push(EpochRecord {
            d_loss: d_loss_sum / batches as f64,
            g_loss: g_loss_sum / batches as f64,
            bot_human_ratio: ratio,
            hb_validation_accuracy: val_acc,
        });
    }

    let (_, dstar) = best.expect("epochs >= 1 guarantees a snapshot");
    Ok(GanBundle {
        generator,
        discriminator: dstar,
        config: config.clone(),
        log,
        seed: rng.seed(),
    })
}

/// Replaces a seeded choice of `ceil(fraction * n)` rows of `real` with
/// generated samples labeled by their rounded label units. Raw
/// follower/post counts of replaced rows are zeroed.
pub fn augment_dataset(
    real: &Dataset,
    generator: &GeneratorNet,
    synthetic_fraction: f64,
    rng: &mut Rng,
) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&synthetic_fraction) {
        return Err(Error::Domain(format!(
            "synthetic_fraction must be in [0,1], got {synthetic_fraction}"
        )));
    }
    if generator.feature_dim != real.n_features() {
        return Err(Error::Shape(format!(
            "generator emits {} features, dataset has {}",
            generator.feature_dim,
            real.n_features()
        )));
    }
    let n = real.n_rows();
    let count = (synthetic_fraction * n as f64).ceil() as usize;
    let mut out = real.clone();
    if count == 0 {
        return Ok(out);
    }

    let mut indices: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut indices);
    indices.truncate(count);

    let (features, label_units) = generate_samples(generator, count, rng)?;
    for (row, &target) in indices.iter().enumerate() {
        for j in 0..real.n_features() {
            out.features[[target, j]] = features[[row, j]] as f32;
        }
        out.labels[target] = if label_units[row].round() >= 1.0 {
            Label::Bot
        } else {
            Label::Human
        };
        if let Some(f) = out.followers_raw.as_mut() {
            f[target] = 0.0;
        }
        if let Some(p) = out.posts_raw.as_mut() {
            p[target] = 0.0;
        }
    }
    Ok(out)
}

/// Writes a train log as CSV: epoch, d_loss, g_loss, bot_human_ratio,
/// val_acc.
pub fn train_log_csv(log: &TrainLog) -> String {
    let mut out = String::from("epoch,d_loss,g_loss,bot_human_ratio,val_acc\n");
    for (epoch, r) in log.epochs.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            epoch, r.d_loss, r.g_loss, r.bot_human_ratio, r.hb_validation_accuracy
        ));
    }
    out
}
