//! BDF v1, the crate's portable binary dataset format.
//!
//! Layout (little-endian throughout):
//!
//! ```text
//! magic "BDF1" | u32 version=1 | u32 manifest_length | JSON manifest
//! | features: n_rows * n_cols f32, row-major
//! | labels: n_rows bytes (0/1/255), present iff has_labels
//! | followers_raw: n_rows f64, then posts_raw: n_rows f64, iff has_raw_aux
//! ```
//!
//! The JSON manifest is `{n_rows, n_cols, feature_names, has_labels,
//! created_at_index, has_raw_aux}`. Read errors carry the byte offset of
//! the first bad or missing byte.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::binio::Cursor;
use crate::error::{Error, Result};

use super::{Dataset, Label};

const MAGIC: &[u8; 4] = b"BDF1";
const VERSION: u32 = 1;
/// Sanity cap on the JSON manifest; real manifests are a few KB.
const MAX_MANIFEST_LEN: usize = 16 * 1024 * 1024;

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    n_rows: usize,
    n_cols: usize,
    feature_names: Vec<String>,
    has_labels: bool,
    created_at_index: Option<usize>,
    has_raw_aux: bool,
}

/// Writes `dataset` as BDF v1.
pub fn write_bdf(dataset: &Dataset, path: &Path) -> Result<()> {
    dataset.validate()?;
    let has_raw_aux = dataset.followers_raw.is_some() && dataset.posts_raw.is_some();
    let manifest = Manifest {
        n_rows: dataset.n_rows(),
        n_cols: dataset.n_features(),
        feature_names: dataset.feature_names.clone(),
        has_labels: true,
        created_at_index: dataset.created_at_index,
        has_raw_aux,
    };
    let manifest_json = serde_json::to_vec(&manifest)?;

    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(manifest_json.len() as u32).to_le_bytes())?;
    w.write_all(&manifest_json)?;
    for &x in dataset.features.iter() {
        w.write_all(&x.to_le_bytes())?;
    }
    for &label in &dataset.labels {
        w.write_all(&[label.to_byte()])?;
    }
    if has_raw_aux {
        for &x in dataset.followers_raw.as_ref().unwrap() {
            w.write_all(&x.to_le_bytes())?;
        }
        for &x in dataset.posts_raw.as_ref().unwrap() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a BDF v1 file.
pub fn read_bdf(path: &Path) -> Result<Dataset> {
    read_bdf_from(BufReader::new(File::open(path)?))
}

/// Reads a BDF v1 image from memory (used by tests and fuzzing).
pub fn read_bdf_bytes(bytes: &[u8]) -> Result<Dataset> {
    read_bdf_from(bytes)
}

fn read_bdf_from<R: Read>(reader: R) -> Result<Dataset> {
    let mut r = Cursor::new(reader);

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic, "magic")?;
    if &magic != MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: format!("bad magic {:?}, expected \"BDF1\"", magic),
        });
    }
    let version = r.read_u32("version")?;
    if version != VERSION {
        return Err(Error::Format {
            offset: 4,
            message: format!("unsupported version {version}, expected {VERSION}"),
        });
    }
    let manifest_len = r.read_u32("manifest length")? as usize;
    let manifest_offset = r.offset();
    if manifest_len > MAX_MANIFEST_LEN {
        return Err(Error::Format {
            offset: 8,
            message: format!("manifest length {manifest_len} exceeds the {MAX_MANIFEST_LEN}-byte cap"),
        });
    }
    let manifest_buf = r.read_bytes(manifest_len, "manifest")?;
    let manifest: Manifest = serde_json::from_slice(&manifest_buf).map_err(|e| Error::Format {
        offset: manifest_offset,
        message: format!("manifest is not valid JSON: {e}"),
    })?;
    if manifest.feature_names.len() != manifest.n_cols {
        return Err(Error::Format {
            offset: manifest_offset,
            message: format!(
                "manifest lists {} feature names for {} columns",
                manifest.feature_names.len(),
                manifest.n_cols
            ),
        });
    }
    if let Some(idx) = manifest.created_at_index {
        if idx >= manifest.n_cols {
            return Err(Error::Format {
                offset: manifest_offset,
                message: format!(
                    "created_at_index {idx} out of range for {} columns",
                    manifest.n_cols
                ),
            });
        }
    }
    let n_cells = manifest.n_rows.checked_mul(manifest.n_cols).ok_or_else(|| Error::Format {
        offset: manifest_offset,
        message: "n_rows * n_cols overflows".into(),
    })?;

    let values = r.read_f32s(n_cells, "feature payload")?;
    let features = Array2::from_shape_vec((manifest.n_rows, manifest.n_cols), values)
        .expect("shape follows from n_cells");

    let labels = if manifest.has_labels {
        let label_offset = r.offset();
        let label_buf = r.read_bytes(manifest.n_rows, "label payload")?;
        label_buf
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                Label::from_byte(b).map_err(|_| Error::Format {
                    offset: label_offset + i as u64,
                    message: format!("invalid label byte {b} for row {i}"),
                })
            })
            .collect::<Result<Vec<Label>>>()?
    } else {
        vec![Label::Unlabeled; manifest.n_rows]
    };

    let (followers_raw, posts_raw) = if manifest.has_raw_aux {
        let followers = r.read_f64s(manifest.n_rows, "followers_raw payload")?;
        let posts = r.read_f64s(manifest.n_rows, "posts_raw payload")?;
        (Some(followers), Some(posts))
    } else {
        (None, None)
    };

    let dataset = Dataset {
        features,
        labels,
        feature_names: manifest.feature_names,
        created_at_index: manifest.created_at_index,
        followers_raw,
        posts_raw,
    };
    dataset.validate()?;
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use tempfile::tempdir;

    fn sample_dataset() -> Dataset {
        let mut ds = Dataset::new(
            array![[0.1, 0.9], [0.5, 0.25], [1.0, 0.0]],
            vec![Label::Human, Label::Bot, Label::Unlabeled],
            vec!["created".into(), "followers".into()],
        )
        .unwrap();
        ds.created_at_index = Some(0);
        ds.followers_raw = Some(vec![10.0, 250.5, 3.0]);
        ds.posts_raw = Some(vec![4.0, 90.0, 0.0]);
        ds
    }

    #[test]
    fn round_trip_is_lossless() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("sample.bdf");
        let ds = sample_dataset();
        write_bdf(&ds, &path).unwrap();
        let back = read_bdf(&path).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn bad_magic_is_reported_at_offset_zero() {
        let err = read_bdf_bytes(b"XXXX\x01\x00\x00\x00").unwrap_err();
        match err {
            Error::Format { offset, message } => {
                assert_eq!(offset, 0);
                assert!(message.contains("bad magic"), "{message}");
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_payload_names_offset() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("sample.bdf");
        write_bdf(&sample_dataset(), &path).unwrap();
        let full = std::fs::read(&path).unwrap();
        // Drop the last 10 bytes of the raw-aux payload.
        let truncated = &full[..full.len() - 10];
        let err = read_bdf_bytes(truncated).unwrap_err();
        match err {
            Error::Format { message, .. } => {
                assert!(message.contains("truncated"), "{message}")
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn version_mismatch_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("sample.bdf");
        write_bdf(&sample_dataset(), &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[4] = 9;
        let err = read_bdf_bytes(&bytes).unwrap_err();
        match err {
            Error::Format { offset, message } => {
                assert_eq!(offset, 4);
                assert!(message.contains("version"), "{message}");
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn absurd_row_claim_fails_without_allocating() {
        // A manifest claiming ~10^12 rows must hit a clean truncation
        // error at the real end of input, not attempt a terabyte buffer.
        let manifest = serde_json::json!({
            "n_rows": 1_000_000_000_000u64, "n_cols": 1,
            "feature_names": ["f0"],
            "has_labels": true,
            "created_at_index": null,
            "has_raw_aux": false
        })
        .to_string();
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"BDF1");
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&(manifest.len() as u32).to_le_bytes());
        bytes.extend_from_slice(manifest.as_bytes());
        bytes.extend_from_slice(&[0u8; 64]);
        let err = read_bdf_bytes(&bytes).unwrap_err();
        match err {
            Error::Format { message, .. } => {
                assert!(message.contains("truncated"), "{message}")
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn oversized_manifest_length_is_capped() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"BDF1");
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&u32::MAX.to_le_bytes());
        bytes.extend_from_slice(&[b'{'; 32]);
        let err = read_bdf_bytes(&bytes).unwrap_err();
        match err {
            Error::Format { message, .. } => assert!(message.contains("cap"), "{message}"),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn manifest_row_count_must_match_payload() {
        // Manifest claims 10 rows but the payload holds 9 rows' worth of
        // features.
        let manifest = serde_json::json!({
            "n_rows": 10, "n_cols": 1,
            "feature_names": ["f0"],
            "has_labels": true,
            "created_at_index": null,
            "has_raw_aux": false
        })
        .to_string();
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"BDF1");
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&(manifest.len() as u32).to_le_bytes());
        bytes.extend_from_slice(manifest.as_bytes());
        for i in 0..9 {
            bytes.extend_from_slice(&(i as f32).to_le_bytes());
        }
        let err = read_bdf_bytes(&bytes).unwrap_err();
        match err {
            Error::Format { message, .. } => {
                assert!(message.contains("truncated"), "{message}")
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }
}
