//! Dropout-GAN training: one generator against `k` discriminators with
//! per-epoch random inclusion, plus the D*-vs-G* refinement stage and the
//! discriminator-count sweep.
//!
//! Discriminators here train the real/fake head only, on real batches drawn
//! from humans and bots together; labels are never used. The generator's
//! loss each minibatch is the mean rf-fooling BCE over the epoch's active
//! discriminators, so it receives exactly one update per minibatch no
//! matter how many discriminators are active.

use ndarray::{s, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::gan::{
    generate_samples, mode_collapse_ratio, DiscriminatorNet, EpochRecord, GanConfig, GeneratorNet,
    Ratio, TrainLog, RF,
};
use crate::nn::{adam_step, backward, bce_with_logits, forward, AdamState};
use crate::rng::Rng;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DropoutGanConfig {
    pub base: GanConfig,
    pub num_discriminators: usize,
    /// Inclusion threshold: discriminator `i` is active in an epoch iff its
    /// uniform draw exceeds this value.
    pub keep_threshold: f64,
    /// Also draw real batches from unlabeled rows (off by default; the
    /// supervised pipeline trains on labeled users only).
    pub use_unlabeled_real: bool,
}

impl DropoutGanConfig {
    pub fn new(base: GanConfig, num_discriminators: usize) -> Self {
        DropoutGanConfig {
            base,
            num_discriminators,
            keep_threshold: 0.5,
            use_unlabeled_real: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.num_discriminators < 1 {
            return Err(Error::Config(
                "num_discriminators must be at least 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.keep_threshold) {
            return Err(Error::Config(format!(
                "keep_threshold must be in [0,1), got {}",
                self.keep_threshold
            )));
        }
        Ok(())
    }
}

/// One completed Dropout-GAN epoch: per-discriminator rf loss (`None` for
/// inactive ones), generator loss, the active set, and the bot/human ratio
/// of the probe's rounded label units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropoutEpochRecord {
    pub disc_rf_losses: Vec<Option<f64>>,
    pub g_loss: f64,
    pub active_set: Vec<usize>,
    pub label_unit_ratio: Ratio,
}

impl DropoutEpochRecord {
    /// Mean rf loss over the epoch's active discriminators.
    pub fn mean_active_loss(&self) -> f64 {
        let active: Vec<f64> = self.disc_rf_losses.iter().flatten().copied().collect();
        active.iter().sum::<f64>() / active.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DropoutTrainLog {
    pub epochs: Vec<DropoutEpochRecord>,
}

/// Trained G* with its k discriminators and per-epoch log.
#[derive(Debug, Clone)]
pub struct DropoutGanBundle {
    pub generator: GeneratorNet,
    pub discriminators: Vec<DiscriminatorNet>,
    pub config: DropoutGanConfig,
    pub log: DropoutTrainLog,
    pub seed: u64,
}

/// Epoch log of the plain rf-only reference trainer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfEpochRecord {
    pub d_loss: f64,
    pub g_loss: f64,
    pub label_unit_ratio: Ratio,
}

/// Draws the epoch's active set: `u_i ~ U(0,1)` per discriminator, active
/// iff `u_i > threshold`; if none qualify one is forced uniformly at
/// random. Only this stream is consumed, so inactive epochs do not disturb
/// the training streams.
pub fn draw_active_set(k: usize, threshold: f64, rng: &mut Rng) -> Vec<usize> {
    let mut active: Vec<usize> = (0..k).filter(|_| rng.next_f64() > threshold).collect();
    if active.is_empty() {
        active.push(rng.index(k));
    }
    active
}

fn real_row_pool(data: &Dataset, use_unlabeled: bool) -> Result<Vec<usize>> {
    let rows: Vec<usize> = if use_unlabeled {
        (0..data.n_rows()).collect()
    } else {
        data.labeled_indices()
    };
    if rows.is_empty() {
        return Err(Error::Domain(
            "no rows available as real samples for dropout training".into(),
        ));
    }
    Ok(rows)
}

/// One rf-head-only Adam update for a single discriminator: BCE over the
/// combined batch with real -> 1, generated -> 0. The hb head receives zero
/// gradient. Returns the rf loss.
fn rf_discriminator_step(
    disc: &mut DiscriminatorNet,
    state: &mut AdamState,
    real: ArrayView2<f64>,
    fake: ArrayView2<f64>,
    dropout_rate: f64,
    dropout_rng: &mut Rng,
) -> Result<f64> {
    let n_real = real.nrows();
    let n_fake = fake.nrows();

    let (logits_real, cache_real) = forward(&disc.params, real, true, dropout_rate, dropout_rng)?;
    let (logits_fake, cache_fake) = forward(&disc.params, fake, true, dropout_rate, dropout_rng)?;

    let mut rf_logits = logits_real.column(RF).to_vec();
    rf_logits.extend(logits_fake.column(RF).iter());
    let mut rf_targets = vec![1.0; n_real];
    rf_targets.extend(std::iter::repeat_n(0.0, n_fake));
    let (rf_loss, rf_grad) = bce_with_logits(&rf_logits, &rf_targets)?;

    let mut grad_real = Array2::zeros((n_real, 2));
    let mut grad_fake = Array2::zeros((n_fake, 2));
    for i in 0..n_real {
        grad_real[[i, RF]] = rf_grad[i];
    }
    for i in 0..n_fake {
        grad_fake[[i, RF]] = rf_grad[n_real + i];
    }

    let mut grads = backward(&disc.params, &cache_real, grad_real.view())?;
    let fake_grads = backward(&disc.params, &cache_fake, grad_fake.view())?;
    grads.add(&fake_grads);
    adam_step(&mut disc.params, &grads, state)?;
    Ok(rf_loss)
}

/// One generator Adam update minimizing the mean over `active`
/// discriminators of `BCE(rf_i(G(z)), 1)`. Returns the mean loss.
fn generator_step_vs_many(
    generator: &mut GeneratorNet,
    state: &mut AdamState,
    discs: &[DiscriminatorNet],
    active: &[usize],
    batch_size: usize,
    noise_rng: &mut Rng,
) -> Result<f64> {
    let z = Array2::from_shape_fn((batch_size, generator.noise_dim()), |_| noise_rng.normal());
    let mut unused = Rng::new(0);
    let (outputs, gen_cache) = forward(&generator.params, z.view(), false, 0.0, &mut unused)?;
    let d = generator.feature_dim;
    let features = outputs.slice(s![.., ..d]).to_owned();

    let ones = vec![1.0; batch_size];
    let mut loss_sum = 0.0;
    let mut feature_grad = Array2::<f64>::zeros((batch_size, d));
    for &i in active {
        let (logits, cache) =
            forward(&discs[i].params, features.view(), false, 0.0, &mut unused)?;
        let (loss, grad) = bce_with_logits(&logits.column(RF).to_vec(), &ones)?;
        loss_sum += loss;
        let mut out_grad = Array2::zeros((batch_size, 2));
        for r in 0..batch_size {
            out_grad[[r, RF]] = grad[r];
        }
        let through = backward(&discs[i].params, &cache, out_grad.view())?;
        feature_grad += &through.input_grad;
    }
    let scale = 1.0 / active.len() as f64;
    feature_grad *= scale;

    let mut gen_out_grad = Array2::zeros((batch_size, d + 1));
    gen_out_grad.slice_mut(s![.., ..d]).assign(&feature_grad);
    let gen_grads = backward(&generator.params, &gen_cache, gen_out_grad.view())?;
    adam_step(&mut generator.params, &gen_grads, state)?;
    Ok(loss_sum * scale)
}

/// Bot/human ratio of the probe's rounded label units.
fn label_unit_ratio(generator: &GeneratorNet, probe_z: &Array2<f64>) -> Result<Ratio> {
    let mut unused = Rng::new(0);
    let (outputs, _) = forward(&generator.params, probe_z.view(), false, 0.0, &mut unused)?;
    let d = generator.feature_dim;
    let bots = outputs
        .column(d)
        .iter()
        .filter(|&&l| l.round() >= 1.0)
        .count();
    let humans = outputs.nrows() - bots;
    Ok(if humans == 0 {
        Ratio::Infinite
    } else {
        Ratio::Finite(bots as f64 / humans as f64)
    })
}

/// Trains one generator against `k` rf-only discriminators with per-epoch
/// random inclusion.
pub fn train_dropout(
    train_data: &Dataset,
    config: &DropoutGanConfig,
    rng: &Rng,
) -> Result<DropoutGanBundle> {
    config.validate()?;
    let base = &config.base;
    if train_data.n_features() != base.feature_dim {
        return Err(Error::Shape(format!(
            "data has {} features but config.feature_dim is {}",
            train_data.n_features(),
            base.feature_dim
        )));
    }
    let rows = real_row_pool(train_data, config.use_unlabeled_real)?;
    let k = config.num_discriminators;

    let mut generator = GeneratorNet::init(base, &mut rng.derive("init/generator"))?;
    let mut discriminators = Vec::with_capacity(k);
    for i in 0..k {
        discriminators.push(DiscriminatorNet::init(
            base,
            &mut rng.derive(&format!("init/discriminator/{i}")),
        )?);
    }
    let mut gen_state = AdamState::new(&generator.params, base.learning_rate);
    let mut disc_states: Vec<AdamState> = discriminators
        .iter()
        .map(|d| AdamState::new(&d.params, base.learning_rate))
        .collect();

    let mut shuffle_rng = rng.derive("shuffle");
    let mut noise_rng = rng.derive("noise");
    let mut dropout_rngs: Vec<Rng> = (0..k)
        .map(|i| rng.derive(&format!("dropout/discriminator/{i}")))
        .collect();
    let mut active_rng = rng.derive("active-set");
    let probe_z = generator.sample_noise(crate::gan::PROBE_SIZE, &mut rng.derive("probe"));

    let mut log = DropoutTrainLog::default();
    for _epoch in 0..base.epochs {
        let active = draw_active_set(k, config.keep_threshold, &mut active_rng);

        let mut order = rows.clone();
        shuffle_rng.shuffle(&mut order);

        let mut disc_loss_sums = vec![0.0f64; k];
        let mut g_loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(base.batch_size) {
            let real = train_data.rows_f64(chunk);

            let z = Array2::from_shape_fn((chunk.len(), base.noise_dim), |_| noise_rng.normal());
            let mut unused = Rng::new(0);
            let (fake_out, _) = forward(&generator.params, z.view(), false, 0.0, &mut unused)?;
            let fake_features = fake_out.slice(s![.., ..base.feature_dim]).to_owned();

            for &i in &active {
                disc_loss_sums[i] += rf_discriminator_step(
                    &mut discriminators[i],
                    &mut disc_states[i],
                    real.view(),
                    fake_features.view(),
                    base.dropout_rate,
                    &mut dropout_rngs[i],
                )?;
            }
            g_loss_sum += generator_step_vs_many(
                &mut generator,
                &mut gen_state,
                &discriminators,
                &active,
                chunk.len(),
                &mut noise_rng,
            )?;
            batches += 1;
        }

        let record = DropoutEpochRecord {
            disc_rf_losses: (0..k)
                .map(|i| {
                    active
                        .contains(&i)
                        .then(|| disc_loss_sums[i] / batches as f64)
                })
                .collect(),
            g_loss: g_loss_sum / batches as f64,
            active_set: active,
            label_unit_ratio: label_unit_ratio(&generator, &probe_z)?,
        };
        log.epochs.push(record);
    }

    Ok(DropoutGanBundle {
        generator,
        discriminators,
        config: config.clone(),
        log,
        seed: rng.seed(),
    })
}

/// The standard single-discriminator real-vs-fake GAN trainer. This is the
/// reference the `k = 1, threshold = 0` Dropout-GAN configuration must
/// reproduce bit-exactly under the same seed.
pub fn train_rf_only(
    train_data: &Dataset,
    config: &GanConfig,
    rng: &Rng,
) -> Result<(GeneratorNet, DiscriminatorNet, Vec<RfEpochRecord>)> {
    config.validate()?;
    if train_data.n_features() != config.feature_dim {
        return Err(Error::Shape(format!(
            "data has {} features but config.feature_dim is {}",
            train_data.n_features(),
            config.feature_dim
        )));
    }
    let rows = real_row_pool(train_data, false)?;

    let mut generator = GeneratorNet::init(config, &mut rng.derive("init/generator"))?;
    let mut discriminator =
        DiscriminatorNet::init(config, &mut rng.derive("init/discriminator/0"))?;
    let mut gen_state = AdamState::new(&generator.params, config.learning_rate);
    let mut disc_state = AdamState::new(&discriminator.params, config.learning_rate);

    let mut shuffle_rng = rng.derive("shuffle");
    let mut noise_rng = rng.derive("noise");
    let mut dropout_rng = rng.derive("dropout/discriminator/0");
    let probe_z = generator.sample_noise(crate::gan::PROBE_SIZE, &mut rng.derive("probe"));

    let mut log = Vec::with_capacity(config.epochs);
    for _epoch in 0..config.epochs {
        let mut order = rows.clone();
        shuffle_rng.shuffle(&mut order);

        let mut d_loss_sum = 0.0;
        let mut g_loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let real = train_data.rows_f64(chunk);

            let z = Array2::from_shape_fn((chunk.len(), config.noise_dim), |_| noise_rng.normal());
            let mut unused = Rng::new(0);
            let (fake_out, _) = forward(&generator.params, z.view(), false, 0.0, &mut unused)?;
            let fake_features = fake_out.slice(s![.., ..config.feature_dim]).to_owned();

            d_loss_sum += rf_discriminator_step(
                &mut discriminator,
                &mut disc_state,
                real.view(),
                fake_features.view(),
                config.dropout_rate,
                &mut dropout_rng,
            )?;
            let discs = std::slice::from_ref(&discriminator);
            g_loss_sum += generator_step_vs_many(
                &mut generator,
                &mut gen_state,
                discs,
                &[0],
                chunk.len(),
                &mut noise_rng,
            )?;
            batches += 1;
        }

        log.push(RfEpochRecord {
            d_loss: d_loss_sum / batches as f64,
            g_loss: g_loss_sum / batches as f64,
            label_unit_ratio: label_unit_ratio(&generator, &probe_z)?,
        });
    }
    Ok((generator, discriminator, log))
}

/// Fine-tunes D* against a frozen G*: hb BCE on real labels, hb BCE on
/// generated samples against their rounded label units, rf BCE real-vs-
/// generated. The log's `g_loss` is the measured (not optimized) fooling
/// loss and `hb_validation_accuracy` is measured on `real`'s labeled rows.
pub fn refine_dstar(
    dstar: &DiscriminatorNet,
    gstar: &GeneratorNet,
    real: &Dataset,
    config: &GanConfig,
    epochs: usize,
    rng: &Rng,
) -> Result<(DiscriminatorNet, TrainLog)> {
    if gstar.feature_dim != dstar.feature_dim() {
        return Err(Error::Shape(format!(
            "G* emits {} features, D* expects {}",
            gstar.feature_dim,
            dstar.feature_dim()
        )));
    }
    if real.n_features() != dstar.feature_dim() {
        return Err(Error::Shape(format!(
            "data has {} features, D* expects {}",
            real.n_features(),
            dstar.feature_dim()
        )));
    }
    let mut refined = dstar.clone();
    let mut log = TrainLog::default();
    if epochs == 0 {
        return Ok((refined, log));
    }

    let rows = real.labeled_indices();
    if rows.is_empty() {
        return Err(Error::Domain("refinement needs labeled rows".into()));
    }
    let mut disc_state = AdamState::new(&refined.params, config.learning_rate);
    let mut shuffle_rng = rng.derive("shuffle");
    let mut noise_rng = rng.derive("noise");
    let mut dropout_rng = rng.derive("dropout/discriminator/0");
    let probe_z = gstar.sample_noise(crate::gan::PROBE_SIZE, &mut rng.derive("probe"));

    for _epoch in 0..epochs {
        let mut order = rows.clone();
        shuffle_rng.shuffle(&mut order);

        let mut d_loss_sum = 0.0;
        let mut fool_loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let real_batch = real.rows_f64(chunk);
            let real_targets = real.label_targets(chunk);

            let (fake_features, fake_label_units) =
                generate_samples(gstar, chunk.len(), &mut noise_rng)?;
            let fake_targets: Vec<f64> =
                fake_label_units.iter().map(|&l| l.round()).collect();

            d_loss_sum += crate::gan::conventional_discriminator_step(
                &mut refined,
                &mut disc_state,
                real_batch.view(),
                &real_targets,
                fake_features.view(),
                &fake_targets,
                config.dropout_rate,
                &mut dropout_rng,
            )?;

            let logits = refined.logits(fake_features.view())?;
            let (fool, _) =
                bce_with_logits(&logits.column(RF).to_vec(), &vec![1.0; chunk.len()])?;
            fool_loss_sum += fool;
            batches += 1;
        }

        let mut unused = Rng::new(0);
        let (probe_out, _) = forward(&gstar.params, probe_z.view(), false, 0.0, &mut unused)?;
        let probe_features = probe_out.slice(s![.., ..gstar.feature_dim]).to_owned();
        let ratio = mode_collapse_ratio(&refined, probe_features.view())?;
        let val_acc = refined.hb_accuracy(real)?;

        log.epochs.push(EpochRecord {
            d_loss: d_loss_sum / batches as f64,
            g_loss: fool_loss_sum / batches as f64,
            bot_human_ratio: ratio,
            hb_validation_accuracy: val_acc,
        });
    }
    Ok((refined, log))
}

/// D*-vs-G* evaluation result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DstarVsGstar {
    pub rf_accuracy: f64,
    pub rf_loss: f64,
}

/// Scores D*'s real/fake head on a balanced set: every `real_test` row
/// (target real) plus `n_generated` G* samples (target fake). Accuracy is
/// at logit threshold 0; loss is the BCE over the combined set.
pub fn evaluate_dstar_vs_gstar(
    dstar: &DiscriminatorNet,
    gstar: &GeneratorNet,
    real_test: &Dataset,
    n_generated: usize,
    rng: &mut Rng,
) -> Result<DstarVsGstar> {
    if real_test.n_rows() == 0 {
        return Err(Error::Domain("empty test set".into()));
    }
    if n_generated == 0 {
        return Err(Error::Domain("n_generated must be at least 1".into()));
    }
    let all_rows: Vec<usize> = (0..real_test.n_rows()).collect();
    let real_logits = dstar.logits(real_test.rows_f64(&all_rows).view())?;
    let (fake_features, _) = generate_samples(gstar, n_generated, rng)?;
    let fake_logits = dstar.logits(fake_features.view())?;

    let mut rf_logits = real_logits.column(RF).to_vec();
    rf_logits.extend(fake_logits.column(RF).iter());
    let mut targets = vec![1.0; real_test.n_rows()];
    targets.extend(std::iter::repeat_n(0.0, n_generated));

    let correct = rf_logits
        .iter()
        .zip(&targets)
        .filter(|(&logit, &t)| (logit > 0.0) == (t == 1.0))
        .count();
    let (rf_loss, _) = bce_with_logits(&rf_logits, &targets)?;
    Ok(DstarVsGstar {
        rf_accuracy: correct as f64 / rf_logits.len() as f64,
        rf_loss,
    })
}

/// One row of the discriminator-count sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub dstar_test_accuracy: f64,
    pub dstar_test_loss: f64,
}

/// Frozen-D* sweep rows plus, when refinement was requested, the rows for
/// a D* fine-tuned against each cell's G* before measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub frozen: Vec<SweepRow>,
    pub refined: Option<Vec<SweepRow>>,
}

/// For each `k`, trains a Dropout-GAN and scores the conventional D*
/// against the resulting G* on `test_data`. With `refine_epochs` set, a
/// copy of D* is additionally fine-tuned against each cell's G* on
/// `train_data` before a second measurement, so both the frozen and the
/// refined variants come back labeled. Each cell derives its own seed from
/// `rng`, so results do not depend on whether cells run in parallel.
#[allow(clippy::too_many_arguments)]
pub fn sweep_discriminator_count(
    dstar: &DiscriminatorNet,
    train_data: &Dataset,
    test_data: &Dataset,
    config_base: &DropoutGanConfig,
    k_range: &[usize],
    refine_epochs: Option<usize>,
    parallel: bool,
    rng: &Rng,
) -> Result<SweepOutcome> {
    if k_range.is_empty() {
        return Err(Error::Domain("k_range must be non-empty".into()));
    }
    let run_cell = |&k: &usize| -> Result<(SweepRow, Option<SweepRow>)> {
        let mut config = config_base.clone();
        config.num_discriminators = k;
        let cell_rng = rng.derive(&format!("sweep/k={k}"));
        let bundle = train_dropout(train_data, &config, &cell_rng)?;
        let result = evaluate_dstar_vs_gstar(
            dstar,
            &bundle.generator,
            test_data,
            test_data.n_rows(),
            &mut cell_rng.derive("eval"),
        )?;
        let frozen = SweepRow {
            k,
            dstar_test_accuracy: result.rf_accuracy,
            dstar_test_loss: result.rf_loss,
        };
        let refined = match refine_epochs {
            Some(epochs) => {
                let (refined_dstar, _) = refine_dstar(
                    dstar,
                    &bundle.generator,
                    train_data,
                    &config_base.base,
                    epochs,
                    &cell_rng.derive("refine"),
                )?;
                let result = evaluate_dstar_vs_gstar(
                    &refined_dstar,
                    &bundle.generator,
                    test_data,
                    test_data.n_rows(),
                    &mut cell_rng.derive("eval-refined"),
                )?;
                Some(SweepRow {
                    k,
                    dstar_test_accuracy: result.rf_accuracy,
                    dstar_test_loss: result.rf_loss,
                })
            }
            None => None,
        };
        Ok((frozen, refined))
    };
    let mut cells: Vec<(SweepRow, Option<SweepRow>)> = if parallel {
        use rayon::prelude::*;
        k_range.par_iter().map(run_cell).collect::<Result<_>>()?
    } else {
        k_range.iter().map(run_cell).collect::<Result<_>>()?
    };
    cells.sort_by_key(|(row, _)| row.k);
    let refined = refine_epochs
        .is_some()
        .then(|| cells.iter().filter_map(|(_, r)| *r).collect());
    Ok(SweepOutcome {
        frozen: cells.into_iter().map(|(row, _)| row).collect(),
        refined,
    })
}

/// Sweep output as CSV with the columns k, dstar_test_accuracy,
/// dstar_test_loss.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("k,dstar_test_accuracy,dstar_test_loss\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            r.k, r.dstar_test_accuracy, r.dstar_test_loss
        ));
    }
    out
}
