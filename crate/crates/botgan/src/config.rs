//! Run configuration: one resolved record drives every CLI command, is
//! echoed into each run manifest, and can be fed back via `--config` to
//! reproduce a run exactly.
//!
//! Precedence for every field: command-line flag, then config file, then
//! built-in default. The seed has no wall-clock default; it must come from
//! a flag, the config file, or the `BOTGAN_SEED` environment variable
//! (lowest priority).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::BaselineHyperparams;
use crate::dropout_gan::DropoutGanConfig;
use crate::error::{Error, Result};
use crate::gan::GanConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<ReportFormat> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Config(format!(
                "unknown report format {other:?} (expected csv or json)"
            ))),
        }
    }
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

/// Which split of the data a command evaluates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitChoice {
    Train,
    Validation,
    Test,
    All,
}

impl std::str::FromStr for SplitChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<SplitChoice> {
        match s {
            "train" => Ok(SplitChoice::Train),
            "validation" | "val" => Ok(SplitChoice::Validation),
            "test" => Ok(SplitChoice::Test),
            "all" => Ok(SplitChoice::All),
            other => Err(Error::Config(format!(
                "unknown split {other:?} (expected train, validation, test or all)"
            ))),
        }
    }
}

/// Fully resolved run configuration. Defaults are the grid-search winners
/// where the pipeline has one, ordinary desk-scale values elsewhere.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub data: Option<PathBuf>,
    pub out: PathBuf,
    pub format: ReportFormat,
    /// Force single-threaded execution in commands that can fan out.
    pub sequential: bool,

    // Network / training knobs.
    pub noise_dim: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub dropout_rate: f64,
    pub hidden_widths: Vec<usize>,

    // Multi-discriminator training.
    pub num_discriminators: usize,
    pub keep_threshold: f64,
    pub use_unlabeled_real: bool,

    // Feature selection.
    pub bins: usize,
    pub top_k: Option<usize>,

    // Synthetic data generation.
    pub rows: usize,
    pub features: usize,
    pub separation: f64,
    pub bot_fraction: f64,
    pub boolean_fraction: f64,

    // Sweeps and evaluation.
    pub k_range: String,
    pub refine_epochs: usize,
    /// Also measure the sweep with a D* refined against each cell's G*.
    pub sweep_refined: bool,
    pub fractions: Vec<f64>,
    pub runs: usize,
    pub band_percent: f64,
    pub disjoint_bands: bool,
    pub tolerance: f64,
    pub closeness_samples: usize,
    pub n_generated: Option<usize>,
    pub split: SplitChoice,

    // Input artifacts.
    pub model: Option<PathBuf>,
    pub dstar: Option<PathBuf>,
    pub gstar: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub csv_manifest: Option<PathBuf>,
    pub scale: bool,
    pub baseline_kind: Option<String>,

    pub baselines: BaselineHyperparams,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: None,
            data: None,
            out: PathBuf::from("out"),
            format: ReportFormat::Csv,
            sequential: false,
            noise_dim: 100,
            learning_rate: 0.002,
            batch_size: 256,
            epochs: 50,
            dropout_rate: 0.5,
            hidden_widths: vec![128, 128],
            num_discriminators: 5,
            keep_threshold: 0.5,
            use_unlabeled_real: false,
            bins: 10,
            top_k: None,
            rows: 10_000,
            features: 100,
            separation: 0.8,
            bot_fraction: 0.3,
            boolean_fraction: 0.2,
            k_range: "1..10".into(),
            refine_epochs: 10,
            sweep_refined: false,
            fractions: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            runs: 10,
            band_percent: 5.0,
            disjoint_bands: false,
            tolerance: 0.05,
            closeness_samples: 1000,
            n_generated: None,
            split: SplitChoice::Test,
            model: None,
            dstar: None,
            gstar: None,
            csv: None,
            csv_manifest: None,
            scale: false,
            baseline_kind: None,
            baselines: BaselineHyperparams::default(),
        }
    }
}

impl RunConfig {
    /// Loads a config file: either a bare `RunConfig` object or an emitted
    /// run manifest (whose `config` field is used), enabling exact re-runs
    /// straight from a manifest.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config file {path:?}: {e}")))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("config file {path:?} is not valid JSON: {e}")))?;
        let config_value = match value.get("config") {
            Some(inner) => inner.clone(),
            None => value,
        };
        serde_json::from_value(config_value)
            .map_err(|e| Error::Config(format!("config file {path:?}: {e}")))
    }

    /// Resolves the mandatory seed: flag (already merged into `self.seed`)
    /// beats config file beats `BOTGAN_SEED`.
    pub fn resolve_seed(&self) -> Result<u64> {
        if let Some(seed) = self.seed {
            return Ok(seed);
        }
        if let Ok(raw) = std::env::var("BOTGAN_SEED") {
            return raw.parse().map_err(|_| {
                Error::Config(format!("BOTGAN_SEED is not a valid integer: {raw:?}"))
            });
        }
        Err(Error::Config(
            "a seed is required: pass --seed, set it in the config file, or export BOTGAN_SEED"
                .into(),
        ))
    }

    pub fn gan_config(&self, feature_dim: usize) -> GanConfig {
        GanConfig {
            noise_dim: self.noise_dim,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            epochs: self.epochs,
            dropout_rate: self.dropout_rate,
            hidden_widths: self.hidden_widths.clone(),
            feature_dim,
        }
    }

    pub fn dropout_config(&self, feature_dim: usize) -> DropoutGanConfig {
        DropoutGanConfig {
            base: self.gan_config(feature_dim),
            num_discriminators: self.num_discriminators,
            keep_threshold: self.keep_threshold,
            use_unlabeled_real: self.use_unlabeled_real,
        }
    }

    /// Parses the `k_range` field: either `A..B` (inclusive) or a comma
    /// list.
    pub fn parse_k_range(&self) -> Result<Vec<usize>> {
        let raw = self.k_range.trim();
        let parse_one = |s: &str| -> Result<usize> {
            s.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad discriminator count {s:?} in k range")))
        };
        if let Some((lo, hi)) = raw.split_once("..") {
            let lo = parse_one(lo)?;
            let hi = parse_one(hi)?;
            if lo == 0 || hi < lo {
                return Err(Error::Config(format!("bad k range {raw:?}")));
            }
            Ok((lo..=hi).collect())
        } else {
            let ks: Vec<usize> = raw
                .split(',')
                .map(parse_one)
                .collect::<Result<_>>()?;
            if ks.is_empty() || ks.contains(&0) {
                return Err(Error::Config(format!("bad k range {raw:?}")));
            }
            Ok(ks)
        }
    }
}

/// Written next to every command's outputs; feeding it back through
/// `--config` reproduces the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    pub config: RunConfig,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join(format!("{}_manifest.json", self.command.replace('-', "_")));
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}
