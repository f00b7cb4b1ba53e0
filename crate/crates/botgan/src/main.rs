//! Command-line front end: argument parsing, config resolution, dispatch,
//! and exit-code mapping (0 success, 1 usage, 2 data/format, 3 numeric).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use botgan::config::{RunConfig, RunManifest};
use botgan::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "botgan",
    about = "GAN-based social media bot detection: training, sweeps, and evaluation",
    version
)]
struct Cli {
    /// JSON config file (a run manifest also works); flags win over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Run seed. Mandatory: there is no wall-clock default.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Input dataset (BDF).
    #[arg(long, global = true)]
    data: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Report format: csv or json.
    #[arg(long, global = true)]
    format: Option<String>,

    /// Force single-threaded execution in commands that can fan out.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct TrainArgs {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    noise_dim: Option<usize>,
    /// Hidden layer widths, comma separated (e.g. 128,128).
    #[arg(long)]
    hidden: Option<String>,
    /// Select the top-k features by information gain before training.
    #[arg(long)]
    top_k: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Import a CSV dump into the binary dataset format.
    Prepare {
        #[arg(long)]
        csv: Option<PathBuf>,
        /// JSON import manifest naming feature/label/raw columns.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Min-max scale features into [0,1] during import.
        #[arg(long)]
        scale: bool,
    },
    /// Generate a seeded synthetic dataset.
    Synth {
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        features: Option<usize>,
        #[arg(long)]
        separation: Option<f64>,
        #[arg(long)]
        bot_fraction: Option<f64>,
        #[arg(long)]
        bool_fraction: Option<f64>,
    },
    /// Rank features by information gain; optionally export a top-k subset.
    RankFeatures {
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        top_k: Option<usize>,
    },
    /// Train the conventional two-head GAN and save D*/generator.
    TrainGan {
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Train one generator against k dropout-selected discriminators.
    TrainDropoutGan {
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        num_discriminators: Option<usize>,
        #[arg(long)]
        keep_threshold: Option<f64>,
        /// Also use unlabeled rows as real samples.
        #[arg(long)]
        use_unlabeled: bool,
    },
    /// Fine-tune a saved D* against a frozen G*.
    Refine {
        #[arg(long)]
        dstar: Option<PathBuf>,
        #[arg(long)]
        gstar: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        dropout: Option<f64>,
    },
    /// Score a saved model on a data split.
    Evaluate {
        #[arg(long)]
        model: Option<PathBuf>,
        /// train, validation, test or all.
        #[arg(long)]
        split: Option<String>,
    },
    /// Discriminator-count sweep: D* accuracy/loss vs k.
    SweepK {
        #[command(flatten)]
        train: TrainArgs,
        /// Range "1..10" or list "1,3,5".
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        keep_threshold: Option<f64>,
        /// Also measure with a D* refined against each cell's G*.
        #[arg(long)]
        refined: bool,
        #[arg(long)]
        refine_epochs: Option<usize>,
    },
    /// D* accuracy/loss vs synthetic-data fraction, averaged over runs.
    SweepAugmentation {
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        gstar: Option<PathBuf>,
        /// Comma-separated fractions in [0,1].
        #[arg(long)]
        fractions: Option<String>,
        #[arg(long)]
        runs: Option<usize>,
    },
    /// F1 over account-age percentile bands.
    PercentileEval {
        #[arg(long)]
        model: Option<PathBuf>,
        /// Baseline kind to train on the fly instead of --model.
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        band: Option<f64>,
        /// Disjoint bands instead of cumulative ones.
        #[arg(long)]
        disjoint: bool,
        #[arg(long)]
        split: Option<String>,
    },
    /// Per-feature closeness of generated samples to mean human values.
    Closeness {
        #[arg(long)]
        gstar: Option<PathBuf>,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Train and score a reference classifier (knn, svm, mlp, rf).
    Baseline {
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        knn_k: Option<usize>,
        #[arg(long)]
        svm_passes: Option<usize>,
        #[arg(long)]
        mlp_epochs: Option<usize>,
        #[arg(long)]
        trees: Option<usize>,
        #[arg(long)]
        max_depth: Option<usize>,
        #[arg(long)]
        split: Option<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Prepare { .. } => "prepare",
            Command::Synth { .. } => "synth",
            Command::RankFeatures { .. } => "rank-features",
            Command::TrainGan { .. } => "train-gan",
            Command::TrainDropoutGan { .. } => "train-dropout-gan",
            Command::Refine { .. } => "refine",
            Command::Evaluate { .. } => "evaluate",
            Command::SweepK { .. } => "sweep-k",
            Command::SweepAugmentation { .. } => "sweep-augmentation",
            Command::PercentileEval { .. } => "percentile-eval",
            Command::Closeness { .. } => "closeness",
            Command::Baseline { .. } => "baseline",
        }
    }
}

fn parse_widths(raw: &str) -> Result<Vec<usize>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad hidden width {s:?}")))
        })
        .collect()
}

fn parse_fractions(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad fraction {s:?}")))
        })
        .collect()
}

fn merge_train_args(config: &mut RunConfig, args: &TrainArgs) -> Result<()> {
    if let Some(v) = args.epochs {
        config.epochs = v;
    }
    if let Some(v) = args.batch_size {
        config.batch_size = v;
    }
    if let Some(v) = args.learning_rate {
        config.learning_rate = v;
    }
    if let Some(v) = args.dropout {
        config.dropout_rate = v;
    }
    if let Some(v) = args.noise_dim {
        config.noise_dim = v;
    }
    if let Some(raw) = &args.hidden {
        config.hidden_widths = parse_widths(raw)?;
    }
    if let Some(v) = args.top_k {
        config.top_k = Some(v);
    }
    Ok(())
}

/// Builds the resolved config: defaults, then config file, then flags.
fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = Some(seed);
    }
    if let Some(data) = &cli.data {
        config.data = Some(data.clone());
    }
    if let Some(out) = &cli.out {
        config.out = out.clone();
    }
    if let Some(format) = &cli.format {
        config.format = format.parse()?;
    }
    if cli.sequential {
        config.sequential = true;
    }

    match &cli.command {
        Command::Prepare {
            csv,
            manifest,
            scale,
        } => {
            if let Some(v) = csv {
                config.csv = Some(v.clone());
            }
            if let Some(v) = manifest {
                config.csv_manifest = Some(v.clone());
            }
            if *scale {
                config.scale = true;
            }
        }
        Command::Synth {
            rows,
            features,
            separation,
            bot_fraction,
            bool_fraction,
        } => {
            if let Some(v) = rows {
                config.rows = *v;
            }
            if let Some(v) = features {
                config.features = *v;
            }
            if let Some(v) = separation {
                config.separation = *v;
            }
            if let Some(v) = bot_fraction {
                config.bot_fraction = *v;
            }
            if let Some(v) = bool_fraction {
                config.boolean_fraction = *v;
            }
        }
        Command::RankFeatures { bins, top_k } => {
            if let Some(v) = bins {
                config.bins = *v;
            }
            if let Some(v) = top_k {
                config.top_k = Some(*v);
            }
        }
        Command::TrainGan { train } => merge_train_args(&mut config, train)?,
        Command::TrainDropoutGan {
            train,
            num_discriminators,
            keep_threshold,
            use_unlabeled,
        } => {
            merge_train_args(&mut config, train)?;
            if let Some(v) = num_discriminators {
                config.num_discriminators = *v;
            }
            if let Some(v) = keep_threshold {
                config.keep_threshold = *v;
            }
            if *use_unlabeled {
                config.use_unlabeled_real = true;
            }
        }
        Command::Refine {
            dstar,
            gstar,
            epochs,
            batch_size,
            learning_rate,
            dropout,
        } => {
            if let Some(v) = dstar {
                config.dstar = Some(v.clone());
            }
            if let Some(v) = gstar {
                config.gstar = Some(v.clone());
            }
            if let Some(v) = epochs {
                config.refine_epochs = *v;
            }
            if let Some(v) = batch_size {
                config.batch_size = *v;
            }
            if let Some(v) = learning_rate {
                config.learning_rate = *v;
            }
            if let Some(v) = dropout {
                config.dropout_rate = *v;
            }
        }
        Command::Evaluate { model, split } => {
            if let Some(v) = model {
                config.model = Some(v.clone());
            }
            if let Some(v) = split {
                config.split = v.parse()?;
            }
        }
        Command::SweepK {
            train,
            k,
            keep_threshold,
            refined,
            refine_epochs,
        } => {
            merge_train_args(&mut config, train)?;
            if let Some(v) = k {
                config.k_range = v.clone();
            }
            if let Some(v) = keep_threshold {
                config.keep_threshold = *v;
            }
            if *refined {
                config.sweep_refined = true;
            }
            if let Some(v) = refine_epochs {
                config.refine_epochs = *v;
            }
        }
        Command::SweepAugmentation {
            train,
            gstar,
            fractions,
            runs,
        } => {
            merge_train_args(&mut config, train)?;
            if let Some(v) = gstar {
                config.gstar = Some(v.clone());
            }
            if let Some(raw) = fractions {
                config.fractions = parse_fractions(raw)?;
            }
            if let Some(v) = runs {
                config.runs = *v;
            }
        }
        Command::PercentileEval {
            model,
            kind,
            band,
            disjoint,
            split,
        } => {
            if let Some(v) = model {
                config.model = Some(v.clone());
            }
            if let Some(v) = kind {
                config.baseline_kind = Some(v.clone());
            }
            if let Some(v) = band {
                config.band_percent = *v;
            }
            if *disjoint {
                config.disjoint_bands = true;
            }
            if let Some(v) = split {
                config.split = v.parse()?;
            }
        }
        Command::Closeness {
            gstar,
            tolerance,
            samples,
        } => {
            if let Some(v) = gstar {
                config.gstar = Some(v.clone());
            }
            if let Some(v) = tolerance {
                config.tolerance = *v;
            }
            if let Some(v) = samples {
                config.closeness_samples = *v;
            }
        }
        Command::Baseline {
            kind,
            knn_k,
            svm_passes,
            mlp_epochs,
            trees,
            max_depth,
            split,
        } => {
            if let Some(v) = kind {
                config.baseline_kind = Some(v.clone());
            }
            if let Some(v) = knn_k {
                config.baselines.knn_k = *v;
            }
            if let Some(v) = svm_passes {
                config.baselines.svm.passes = *v;
            }
            if let Some(v) = mlp_epochs {
                config.baselines.mlp_epochs = *v;
            }
            if let Some(v) = trees {
                config.baselines.forest.n_trees = *v;
            }
            if let Some(v) = max_depth {
                config.baselines.forest.max_depth = Some(*v);
            }
            if let Some(v) = split {
                config.split = v.parse()?;
            }
        }
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<()> {
    let mut config = resolve_config(cli)?;
    let seed = config.resolve_seed()?;
    config.seed = Some(seed);

    let outputs = match &cli.command {
        Command::Prepare { .. } => commands::prepare(&config)?,
        Command::Synth { .. } => commands::synth(&config, seed)?,
        Command::RankFeatures { .. } => commands::rank_features(&config)?,
        Command::TrainGan { .. } => commands::train_gan(&config, seed)?,
        Command::TrainDropoutGan { .. } => commands::train_dropout_gan(&config, seed)?,
        Command::Refine { .. } => commands::refine(&config, seed)?,
        Command::Evaluate { .. } => commands::evaluate(&config, seed)?,
        Command::SweepK { .. } => commands::sweep_k(&config, seed)?,
        Command::SweepAugmentation { .. } => commands::sweep_augmentation(&config, seed)?,
        Command::PercentileEval { .. } => commands::percentile_eval(&config, seed)?,
        Command::Closeness { .. } => commands::closeness(&config, seed)?,
        Command::Baseline { .. } => commands::baseline(&config, seed)?,
    };

    let manifest = RunManifest {
        command: cli.command.name().to_string(),
        seed,
        config,
        outputs,
    };
    let manifest_path = manifest.write(&manifest.config.out)?;
    println!("run manifest -> {}", manifest_path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are successes; everything else is a
            // usage error.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
