//! Implementations behind the CLI subcommands. Each handler takes the
//! fully resolved [`RunConfig`], writes its artifacts under the output
//! directory, and returns the list of files it wrote.

use std::path::{Path, PathBuf};

use botgan::baselines::{train_baseline, BaselineKind, Classifier};
use botgan::checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, ModelKind};
use botgan::config::{RunConfig, SplitChoice};
use botgan::data::{
    import_csv, minmax_scale, read_bdf, split_80_10_10, synth_generate, write_bdf, CsvManifest,
    Dataset, SplitIndices, SynthConfig,
};
use botgan::dropout_gan::{refine_dstar, sweep_discriminator_count, train_dropout};
use botgan::error::{Error, Result};
use botgan::features::{information_gain, select_top_k};
use botgan::gan::{
    detect_mode_collapse, train_conventional, DiscriminatorNet, GanBundle, GeneratorNet,
};
use botgan::metrics::{augmentation_sweep, closeness_analysis, percentile_f1};
use botgan::nn::bce_with_logits;
use botgan::report;
use botgan::Rng;

fn ensure_out_dir(config: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&config.out)?;
    Ok(())
}

fn load_dataset(config: &RunConfig) -> Result<Dataset> {
    let path = config
        .data
        .as_ref()
        .ok_or_else(|| Error::Config("a dataset is required: pass --data".into()))?;
    read_bdf(path)
}

/// Applies top-k information-gain selection when configured.
fn maybe_select(config: &RunConfig, data: Dataset) -> Result<Dataset> {
    let Some(k) = config.top_k else {
        return Ok(data);
    };
    let ranking = information_gain(&data, config.bins)?;
    let had_created = data.created_at_index.is_some();
    let selected = select_top_k(&data, &ranking, k)?;
    if had_created && selected.created_at_index.is_none() {
        eprintln!("warning: creation-time feature not in the top {k}; percentile evaluation will be unavailable on the selected data");
    }
    Ok(selected)
}

fn split_for(data: &Dataset, seed: u64) -> Result<SplitIndices> {
    split_80_10_10(data, &mut Rng::new(seed).derive("split"))
}

fn rows_for_choice(split: &SplitIndices, data: &Dataset, choice: SplitChoice) -> Vec<usize> {
    match choice {
        SplitChoice::Train => split.train.clone(),
        SplitChoice::Validation => split.validation.clone(),
        SplitChoice::Test => split.test.clone(),
        SplitChoice::All => (0..data.n_rows()).collect(),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn report_path(config: &RunConfig, stem: &str) -> PathBuf {
    config
        .out
        .join(format!("{stem}.{}", config.format.extension()))
}

fn load_classifier(path: &Path) -> Result<(Box<dyn Classifier>, ModelKind)> {
    let checkpoint = load_checkpoint(path)?;
    let kind = checkpoint.header.model_kind;
    let classifier: Box<dyn Classifier> = match kind {
        ModelKind::Discriminator => Box::new(checkpoint.into_discriminator()?),
        ModelKind::MlpBaseline => Box::new(checkpoint.into_mlp()?),
        ModelKind::Generator => {
            return Err(Error::Config(format!(
                "{path:?} holds a generator; evaluation needs a discriminator or mlp checkpoint"
            )))
        }
    };
    Ok((classifier, kind))
}

fn load_generator(path: &Path) -> Result<GeneratorNet> {
    load_checkpoint(path)?.into_generator()
}

fn load_discriminator(path: &Path) -> Result<DiscriminatorNet> {
    load_checkpoint(path)?.into_discriminator()
}

pub fn prepare(config: &RunConfig) -> Result<Vec<PathBuf>> {
    ensure_out_dir(config)?;
    let csv_path = config
        .csv
        .as_ref()
        .ok_or_else(|| Error::Config("prepare needs --csv".into()))?;
    let manifest_path = config
        .csv_manifest
        .as_ref()
        .ok_or_else(|| Error::Config("prepare needs --manifest".into()))?;
    let manifest: CsvManifest = serde_json::from_str(
        &std::fs::read_to_string(manifest_path)
            .map_err(|e| Error::Config(format!("cannot read manifest {manifest_path:?}: {e}")))?,
    )
    .map_err(|e| Error::Manifest(format!("manifest {manifest_path:?}: {e}")))?;

    let mut dataset = import_csv(csv_path, &manifest)?;
    let mut outputs = Vec::new();
    if config.scale {
        let (scaled, record) = minmax_scale(&dataset)?;
        dataset = scaled;
        let record_path = config.out.join("scale_record.json");
        write_text(&record_path, &serde_json::to_string_pretty(&record)?)?;
        outputs.push(record_path);
    }
    let bdf_path = config.out.join("dataset.bdf");
    write_bdf(&dataset, &bdf_path)?;
    println!(
        "imported {} rows x {} features -> {}",
        dataset.n_rows(),
        dataset.n_features(),
        bdf_path.display()
    );
    outputs.insert(0, bdf_path);
    Ok(outputs)
}

pub fn synth(config: &RunConfig, seed: u64) -> Result<Vec<PathBuf>> {
    ensure_out_dir(config)?;
    let synth_config = SynthConfig {
        n_rows: config.rows,
        n_features: config.features,
        bot_fraction: config.bot_fraction,
        cluster_separation: config.separation,
        boolean_feature_fraction: config.boolean_fraction,
        seed,
    };
    let dataset = synth_generate(&synth_config)?;
    let path = config.out.join("synth.bdf");
    write_bdf(&dataset, &path)?;
    println!(
        "generated {} rows x {} features -> {}",
        dataset.n_rows(),
        dataset.n_features(),
        path.display()
    );
    Ok(vec![path])
}

pub fn rank_features(config: &RunConfig) -> Result<Vec<PathBuf>> {
    ensure_out_dir(config)?;
    let data = load_dataset(config)?;
    let ranking = information_gain(&data, config.bins)?;
    let mut outputs = Vec::new();

    let path = report_path(config, "feature_ranking");
    write_text(
        &path,
        &report::ranking_report(&ranking, &data.feature_names, config.format)?,
    )?;
    let best = ranking.order[0];
    println!(
        "top feature: {} (IG {:.6}) -> {}",
        data.feature_names[best],
        ranking.scores[best],
        path.display()
    );
    outputs.push(path);

    if let Some(k) = config.top_k {
        let selected = select_top_k(&data, &ranking, k)?;
        let path = config.out.join("selected.bdf");
        write_bdf(&selected, &path)?;
        println!("wrote top-{k} selection -> {}", path.display());
        outputs.push(path);
    }
    Ok(outputs)
}

/// Shared by train-gan and sweep-k: select, split, train the conventional
/// GAN.
fn train_conventional_pipeline(
    config: &RunConfig,
    seed: u64,
) -> Result<(Dataset, SplitIndices, GanBundle)> {
    let data = maybe_select(config, load_dataset(config)?)?;
    let split = split_for(&data, seed)?;
    let train = data.subset(&split.train);
    let val = data.subset(&split.validation);
    let gan_config = config.gan_config(data.n_features());
    let bundle = train_conventional(&train, &val, &gan_config, &Rng::new(seed).derive("train"))?;
    Ok((data, split, bundle))
}

pub fn train_gan(config: &RunConfig, seed: u64) -> Result<Vec<PathBuf>> {
    ensure_out_dir(config)?;
    let (data, split, bundle) = train_conventional_pipeline(config, seed)?;
    let config_echo = serde_json::to_value(&bundle.config)?;
    let epochs = bundle.log.epochs.len() as u64;

    let gen_path = config.out.join("gan_generator.ckpt");
    save_checkpoint(
        &Checkpoint::new(
            ModelKind::Generator,
            &bundle.generator.params,
            config_echo.clone(),
            seed,
            epochs,
        ),
        &gen_path,
    )?;
    let disc_path = config.out.join("gan_discriminator.ckpt");
    save_checkpoint(
        &Checkpoint::new(
            ModelKind::Discriminator,
            &bundle.discriminator.params,
            config_echo,
            seed,
            epochs,
        ),
        &disc_path,
    )?;
    let log_path = report_path(config, "gan_train_log");
    write_text(&log_path, &report::train_log_report(&bundle.log, config.format)?)?;

    let test = data.subset(&split.test);
    let rows: Vec<usize> = (0..test.n_rows()).collect();
    let eval = report::evaluate_classifier(&bundle.discriminator, &test, &rows)?;
    let eval_path = report_path(config, "gan_eval_report");
    write_text(&eval_path, &report::eval_report(&eval, config.format)?)?;

    println!(
        "D* test accuracy {:.4}, F1 {:.4}",
        eval.metrics.bot_positive.accuracy, eval.metrics.bot_positive.f1
    );
    match detect_mode_collapse(&bundle.log, 10.0, 3) {
        Some(epoch) => println!("mode collapse detected from epoch {epoch}"),
        None => println!("no mode collapse detected (threshold 10, patience 3)"),
    }
    Ok(vec![gen_path, disc_path, log_path, eval_path])
}

pub fn train_dropout_gan(config: &RunConfig, seed: u64) -> Result<Vec<PathBuf>> {
    ensure_out_dir(config)?;
    let data = maybe_select(config, load_dataset(config)?)?;
    let split = split_for(&data, seed)?;
    let train = data.subset(&split.train);
    let dropout_config = config.dropout_config(data.n_features());
    let bundle = train_dropout(&train, &dropout_config, &Rng::new(seed).derive("train"))?;
    let config_echo = serde_json::to_value(&bundle.config)?;
    let epochs = bundle.log.epochs.len() as u64;

    let mut outputs = Vec::new();
    let gstar_path = config.out.join("gstar.ckpt");
    save_checkpoint(
        &Checkpoint::new(
            ModelKind::Generator,
            &bundle.generator.params,
            config_echo.clone(),
            seed,
            epochs,
        ),
        &gstar_path,
    )?;
    outputs.push(gstar_path);
    for (i, disc) in bundle.discriminators.iter().enumerate() {
        let path = config.out.join(format!("dropout_disc_{i}.ckpt"));
        save_checkpoint(
            &Checkpoint::new(
                ModelKind::Discriminator,
                &disc.params,
                config_echo.clone(),
                seed,
                epochs,
            ),
            &path,
        )?;
        outputs.push(path);
    }
    let log_path = report_path(config, "dropout_train_log");
    write_text(
        &log_path,
        &report::dropout_log_report(&bundle.log, config.format)?,
    )?;
    let last = bundle.log.epochs.last().expect("epochs >= 1");
    println!(
        "trained G* against {} discriminators; final g_loss {:.4}, label-unit ratio {}",
        bundle.discriminators.len(),
        last.g_loss,
        last.label_unit_ratio
    );
    outputs.push(log_path);
    Ok(outputs)
}

pub fn refine(config: &RunConfig, seed: u64) -> Result<Vec<PathBuf>> {
    ensure_out_dir(config)?;
    let dstar_path = config
        .dstar
        .as_ref()
        .ok_or_else(|| Error::Config("refine needs --dstar".into()))?;
    let gstar_path = config
        .gstar
        .as_ref()
        .ok_or_else(|| Error::Config("refine needs --gstar".into()))?;
    let dstar = load_discriminator(dstar_path)?;
    let gstar = load_generator(gstar_path)?;
    let data = maybe_select(config, load_dataset(config)?)?;
    let split = split_for(&data, seed)?;
    let train = data.subset(&split.train);

    let gan_config = config.gan_config(data.n_features());
    let (refined, log) = refine_dstar(
        &dstar,
        &gstar,
        &train,
        &gan_config,
        config.refine_epochs,
        &Rng::new(seed).derive("refine"),
    )?;

    let ckpt_path = config.out.join("dstar_refined.ckpt");
    save_checkpoint(
        &Checkpoint::new(
            ModelKind::Discriminator,
            &refined.params,
            serde_json::to_value(&gan_config)?,
            seed,
            config.refine_epochs as u64,
        ),
        &ckpt_path,
    )?;
    let log_path = report_path(config, "refine_log");
    write_text(&log_path, &report::train_log_report(&log, config.format)?)?;

    let test = data.subset(&split.test);
    let rows: Vec<usize> = (0..test.n_rows()).collect();
    let eval = report::evaluate_classifier(&refined, &test, &rows)?;
    let eval_path = report_path(config, "refine_eval_report");
    write_text(&eval_path, &report::eval_report(&eval, config.format)?)?;
    println!(
        "refined D* test accuracy {:.4}",
        eval.metrics.bot_positive.accuracy
    );
    Ok(vec![ckpt_path, log_path, eval_path])
}

pub fn evaluate(config: &RunConfig, seed: u64) -> Result<Vec<PathBuf>> {
    ensure_out_dir(config)?;
    let model_path = config
        .model
        .as_ref()
        .ok_or_else(|| Error::Config("evaluate needs --model".into()))?;
    let (classifier, kind) = load_classifier(model_path)?;
    let data = maybe_select(config, load_dataset(config)?)?;
    let split = split_for(&data, seed)?;
    let rows = rows_for_choice(&split, &data, config.split);

    let eval = report::evaluate_classifier(classifier.as_ref(), &data, &rows)?;
    let path = report_path(config, "eval_report");
    write_text(&path, &report::eval_report(&eval, config.format)?)?;
    println!(
        "{kind:?} on {:?} split: accuracy {:.4}, F1 {:.4}, impact mitigation {}",
        config.split,
        eval.metrics.bot_positive.accuracy,
        eval.metrics.bot_positive.f1,
        eval.impact_mitigation
            .map_or("n/a".to_string(), |m| format!("{m:.4}")),
    );
    Ok(vec![path])
}

pub fn sweep_k(config: &RunConfig, seed: u64) -> Result<Vec<PathBuf>> {
    ensure_out_dir(config)?;
    let k_range = config.parse_k_range()?;
    let (data, split, bundle) = train_conventional_pipeline(config, seed)?;
    let test = data.subset(&split.test);
    let train = data.subset(&split.train);
    let dropout_config = config.dropout_config(data.n_features());

    let outcome = sweep_discriminator_count(
        &bundle.discriminator,
        &train,
        &test,
        &dropout_config,
        &k_range,
        config.sweep_refined.then_some(config.refine_epochs),
        !config.sequential,
        &Rng::new(seed).derive("sweep-k"),
    )?;
    let path = report_path(config, "sweep_k");
    write_text(&path, &report::sweep_report(&outcome.frozen, config.format)?)?;
    for row in &outcome.frozen {
        println!(
            "k={:<2} frozen D* rf accuracy {:.6} loss {:.6}",
            row.k, row.dstar_test_accuracy, row.dstar_test_loss
        );
    }
    let mut outputs = vec![path];
    if let Some(refined) = &outcome.refined {
        let path = report_path(config, "sweep_k_refined");
        write_text(&path, &report::sweep_report(refined, config.format)?)?;
        for row in refined {
            println!(
                "k={:<2} refined D* rf accuracy {:.6} loss {:.6}",
                row.k, row.dstar_test_accuracy, row.dstar_test_loss
            );
        }
        outputs.push(path);
    }
    Ok(outputs)
}

pub fn sweep_augmentation(config: &RunConfig, seed: u64) -> Result<Vec<PathBuf>> {
    ensure_out_dir(config)?;
    let gstar_path = config
        .gstar
        .as_ref()
        .ok_or_else(|| Error::Config("sweep-augmentation needs --gstar".into()))?;
    let gstar = load_generator(gstar_path)?;
    let data = maybe_select(config, load_dataset(config)?)?;
    let split = split_for(&data, seed)?;
    let train = data.subset(&split.train);
    let val = data.subset(&split.validation);
    let test = data.subset(&split.test);
    let gan_config = config.gan_config(data.n_features());

    // Trains a fresh discriminator on each augmented training set and
    // scores its hb head on the untouched real test split.
    let trainer = |augmented: &Dataset, run_seed: u64| -> Result<(f64, f64)> {
        let bundle = train_conventional(augmented, &val, &gan_config, &Rng::new(run_seed))?;
        let test_rows: Vec<usize> = (0..test.n_rows()).collect();
        let accuracy = bundle.discriminator.hb_accuracy(&test)?;
        let logits = bundle.discriminator.logits(test.rows_f64(&test_rows).view())?;
        let targets = test.label_targets(&test_rows);
        let (loss, _) = bce_with_logits(&logits.column(botgan::gan::HB).to_vec(), &targets)?;
        Ok((accuracy, loss))
    };

    let points = augmentation_sweep(
        trainer,
        &train,
        &gstar,
        &config.fractions,
        config.runs,
        &Rng::new(seed).derive("augmentation"),
    )?;
    let path = report_path(config, "augmentation_sweep");
    write_text(&path, &report::augmentation_report(&points, config.format)?)?;
    for p in &points {
        println!(
            "fraction {:.2}: accuracy {:.4}, loss {:.4}",
            p.fraction, p.test_accuracy, p.test_loss
        );
    }
    Ok(vec![path])
}

pub fn percentile_eval(config: &RunConfig, seed: u64) -> Result<Vec<PathBuf>> {
    ensure_out_dir(config)?;
    let data = maybe_select(config, load_dataset(config)?)?;
    let split = split_for(&data, seed)?;

    let classifier: Box<dyn Classifier> = match (&config.model, &config.baseline_kind) {
        (Some(path), _) => load_classifier(path)?.0,
        (None, Some(kind)) => {
            let kind: BaselineKind = kind.parse()?;
            let train = data.subset(&split.train);
            Box::new(train_baseline(
                kind,
                &train,
                &config.baselines,
                &Rng::new(seed).derive("baseline"),
            )?)
        }
        (None, None) => {
            return Err(Error::Config(
                "percentile-eval needs --model or --kind".into(),
            ))
        }
    };

    let rows = rows_for_choice(&split, &data, config.split);
    let eval_set = data.subset(&rows);
    let bands = percentile_f1(
        |features| classifier.predict(features),
        &eval_set,
        config.band_percent,
        !config.disjoint_bands,
    )?;
    let path = report_path(config, "percentile_f1");
    write_text(&path, &report::percentile_report(&bands, config.format)?)?;
    println!(
        "{} bands of {}% -> {}",
        bands.len(),
        config.band_percent,
        path.display()
    );
    Ok(vec![path])
}

pub fn closeness(config: &RunConfig, seed: u64) -> Result<Vec<PathBuf>> {
    ensure_out_dir(config)?;
    let gstar_path = config
        .gstar
        .as_ref()
        .ok_or_else(|| Error::Config("closeness needs --gstar".into()))?;
    let gstar = load_generator(gstar_path)?;
    let data = maybe_select(config, load_dataset(config)?)?;

    let records = closeness_analysis(
        &gstar,
        &data,
        config.tolerance,
        config.closeness_samples,
        &mut Rng::new(seed).derive("closeness"),
    )?;
    let path = report_path(config, "closeness");
    write_text(&path, &report::closeness_report(&records, config.format)?)?;
    let top = &records[0];
    println!(
        "closest feature: {} ({}/{} samples within {:.0}%)",
        top.feature_name,
        top.close_count,
        config.closeness_samples,
        config.tolerance * 100.0
    );
    Ok(vec![path])
}

pub fn baseline(config: &RunConfig, seed: u64) -> Result<Vec<PathBuf>> {
    ensure_out_dir(config)?;
    let kind: BaselineKind = config
        .baseline_kind
        .as_ref()
        .ok_or_else(|| Error::Config("baseline needs --kind".into()))?
        .parse()?;
    let data = maybe_select(config, load_dataset(config)?)?;
    let split = split_for(&data, seed)?;
    let train = data.subset(&split.train);
    let model = train_baseline(kind, &train, &config.baselines, &Rng::new(seed).derive("baseline"))?;

    let rows = rows_for_choice(&split, &data, config.split);
    let eval = report::evaluate_classifier(&model, &data, &rows)?;
    let stem = format!("baseline_{}_report", config.baseline_kind.as_ref().unwrap());
    let path = report_path(config, &stem);
    write_text(&path, &report::eval_report(&eval, config.format)?)?;
    println!(
        "{kind:?} on {:?} split: accuracy {:.4}, F1 {:.4}",
        config.split, eval.metrics.bot_positive.accuracy, eval.metrics.bot_positive.f1
    );
    Ok(vec![path])
}
