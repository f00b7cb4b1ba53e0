//! DGCK v1, the crate's model checkpoint format.
//!
//! Layout (little-endian throughout):
//!
//! ```text
//! magic "DGCK" | u32 version=1 | u32 header_length | JSON header
//! | per layer: weights (out_dim * in_dim f32, row-major), then biases
//!   (out_dim f32)
//! ```
//!
//! The JSON header is `{model_kind, layer_specs, activations, config, seed,
//! epochs_done}`. Parameters are stored as 32-bit floats and re-widened to
//! 64-bit on load, so a save/load round trip is exact only to f32
//! precision.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::baselines::MlpBaseline;
use crate::binio::Cursor;
use crate::error::{Error, Result};
use crate::gan::{DiscriminatorNet, GeneratorNet};
use crate::nn::{Activation, LayerSpec, MlpParams};

const MAGIC: &[u8; 4] = b"DGCK";
const VERSION: u32 = 1;
/// Sanity cap on the JSON header; real headers are a few KB.
const MAX_HEADER_LEN: usize = 16 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Generator,
    Discriminator,
    MlpBaseline,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub model_kind: ModelKind,
    /// `(in_dim, out_dim)` per layer.
    pub layer_specs: Vec<(usize, usize)>,
    pub activations: Vec<Activation>,
    /// Echo of the run configuration that produced the model.
    pub config: serde_json::Value,
    pub seed: u64,
    pub epochs_done: u64,
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub params: MlpParams,
}

impl Checkpoint {
    pub fn new(
        model_kind: ModelKind,
        params: &MlpParams,
        config: serde_json::Value,
        seed: u64,
        epochs_done: u64,
    ) -> Checkpoint {
        Checkpoint {
            header: CheckpointHeader {
                model_kind,
                layer_specs: params.layers.iter().map(|l| (l.in_dim, l.out_dim)).collect(),
                activations: params.layers.iter().map(|l| l.activation).collect(),
                config,
                seed,
                epochs_done,
            },
            params: params.clone(),
        }
    }

    pub fn into_generator(self) -> Result<GeneratorNet> {
        if self.header.model_kind != ModelKind::Generator {
            return Err(Error::Format {
                offset: 0,
                message: format!(
                    "checkpoint holds a {:?}, expected a generator",
                    self.header.model_kind
                ),
            });
        }
        let feature_dim = self.params.output_dim() - 1;
        Ok(GeneratorNet {
            params: self.params,
            feature_dim,
        })
    }

    pub fn into_discriminator(self) -> Result<DiscriminatorNet> {
        if self.header.model_kind != ModelKind::Discriminator {
            return Err(Error::Format {
                offset: 0,
                message: format!(
                    "checkpoint holds a {:?}, expected a discriminator",
                    self.header.model_kind
                ),
            });
        }
        Ok(DiscriminatorNet {
            params: self.params,
        })
    }

    pub fn into_mlp(self) -> Result<MlpBaseline> {
        if self.header.model_kind != ModelKind::MlpBaseline {
            return Err(Error::Format {
                offset: 0,
                message: format!(
                    "checkpoint holds a {:?}, expected an mlp baseline",
                    self.header.model_kind
                ),
            });
        }
        Ok(MlpBaseline {
            params: self.params,
        })
    }
}

pub fn save_checkpoint(checkpoint: &Checkpoint, path: &Path) -> Result<()> {
    let header = &checkpoint.header;
    if header.layer_specs.len() != checkpoint.params.layers.len()
        || header.activations.len() != checkpoint.params.layers.len()
    {
        return Err(Error::Shape(
            "checkpoint header does not match parameter layer count".into(),
        ));
    }
    let header_json = serde_json::to_vec(header)?;

    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(header_json.len() as u32).to_le_bytes())?;
    w.write_all(&header_json)?;
    for (weights, biases) in checkpoint
        .params
        .weights
        .iter()
        .zip(&checkpoint.params.biases)
    {
        for &x in weights.iter() {
            w.write_all(&(x as f32).to_le_bytes())?;
        }
        for &x in biases.iter() {
            w.write_all(&(x as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    load_checkpoint_from(BufReader::new(File::open(path)?))
}

/// Loads a checkpoint image from memory (used by tests and fuzzing).
pub fn load_checkpoint_bytes(bytes: &[u8]) -> Result<Checkpoint> {
    load_checkpoint_from(bytes)
}

fn load_checkpoint_from<R: Read>(reader: R) -> Result<Checkpoint> {
    let mut r = Cursor::new(reader);

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic, "magic")?;
    if &magic != MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: format!("bad magic {:?}, expected \"DGCK\"", magic),
        });
    }
    let version = r.read_u32("version")?;
    if version != VERSION {
        return Err(Error::Format {
            offset: 4,
            message: format!("unsupported version {version}, expected {VERSION}"),
        });
    }
    let header_len = r.read_u32("header length")? as usize;
    let header_offset = r.offset();
    if header_len > MAX_HEADER_LEN {
        return Err(Error::Format {
            offset: 8,
            message: format!("header length {header_len} exceeds the {MAX_HEADER_LEN}-byte cap"),
        });
    }
    let header_buf = r.read_bytes(header_len, "header")?;
    let header: CheckpointHeader =
        serde_json::from_slice(&header_buf).map_err(|e| Error::Format {
            offset: header_offset,
            message: format!("header is not valid JSON: {e}"),
        })?;
    if header.activations.len() != header.layer_specs.len() {
        return Err(Error::Format {
            offset: header_offset,
            message: format!(
                "header lists {} activations for {} layers",
                header.activations.len(),
                header.layer_specs.len()
            ),
        });
    }
    for pair in header.layer_specs.windows(2) {
        if pair[0].1 != pair[1].0 {
            return Err(Error::Format {
                offset: header_offset,
                message: format!(
                    "layer dims {:?} do not chain into {:?}",
                    pair[0], pair[1]
                ),
            });
        }
    }

    let mut layers = Vec::with_capacity(header.layer_specs.len());
    let mut weights = Vec::with_capacity(header.layer_specs.len());
    let mut biases = Vec::with_capacity(header.layer_specs.len());
    for (i, (&(in_dim, out_dim), &activation)) in header
        .layer_specs
        .iter()
        .zip(&header.activations)
        .enumerate()
    {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::Format {
                offset: header_offset,
                message: format!("layer {i} has zero dimension {in_dim}x{out_dim}"),
            });
        }
        let n_weights = in_dim.checked_mul(out_dim).ok_or_else(|| Error::Format {
            offset: header_offset,
            message: format!("layer {i} dimensions {in_dim}x{out_dim} overflow"),
        })?;
        let w = r.read_f32s(n_weights, &format!("layer {i} weights"))?;
        let b = r.read_f32s(out_dim, &format!("layer {i} biases"))?;
        layers.push(LayerSpec::new(in_dim, out_dim, activation));
        weights.push(
            Array2::from_shape_vec((out_dim, in_dim), w.iter().map(|&x| f64::from(x)).collect())
                .expect("shape just read"),
        );
        biases.push(Array1::from_vec(b.iter().map(|&x| f64::from(x)).collect()));
    }

    Ok(Checkpoint {
        header,
        params: MlpParams {
            layers,
            weights,
            biases,
        },
    })
}
