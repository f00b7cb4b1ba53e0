//! GAN-based social media bot detection.
//!
//! The crate trains a conventional GAN whose discriminator classifies
//! accounts as human or bot, a multi-discriminator "dropout" GAN that keeps
//! the generator from collapsing onto a single output mode, and the
//! evaluation machinery to compare both against standard baselines:
//! classification metrics, impact mitigation, per-age-percentile F1, data
//! augmentation sweeps, and generator/human closeness analysis.
//!
//! Everything is deterministic: every source of randomness is an explicit
//! [`rng::Rng`] seeded by the caller, and training runs replay bit-exactly
//! from a stored seed.

pub mod baselines;
pub(crate) mod binio;
pub mod checkpoint;
pub mod config;
pub mod data;
pub mod dropout_gan;
pub mod error;
pub mod features;
pub mod gan;
pub mod metrics;
pub mod nn;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
pub use rng::Rng;
