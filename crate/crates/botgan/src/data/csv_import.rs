//! CSV ingestion driven by an import manifest.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Dataset, Label};

/// Names the columns an import should pull out of a CSV file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CsvManifest {
    /// Feature columns, in the order they should appear in the dataset.
    pub feature_columns: Vec<String>,
    pub label_column: String,
    /// Feature column holding the (scaled) account creation time, if any.
    #[serde(default)]
    pub created_column: Option<String>,
    /// Raw follower/post count columns for impact scoring, if present.
    #[serde(default)]
    pub followers_column: Option<String>,
    #[serde(default)]
    pub posts_column: Option<String>,
}

fn parse_label(cell: &str, row: usize, column: &str) -> Result<Label> {
    match cell.trim().to_ascii_lowercase().as_str() {
        "human" | "0" => Ok(Label::Human),
        "bot" | "1" => Ok(Label::Bot),
        "unlabeled" | "255" | "" => Ok(Label::Unlabeled),
        other => Err(Error::Parse {
            row,
            column: column.to_string(),
            message: format!("unrecognized label value {other:?}"),
        }),
    }
}

/// Imports `path` according to `manifest`. Column order in the output
/// follows the manifest's feature list; unlabeled rows are retained with
/// label 255.
pub fn import_csv(path: &Path, manifest: &CsvManifest) -> Result<Dataset> {
    import_csv_reader(File::open(path)?, manifest)
}

/// Same as [`import_csv`] over any reader (used by tests and fuzzing).
pub fn import_csv_reader<R: Read>(reader: R, manifest: &CsvManifest) -> Result<Dataset> {
    if manifest.feature_columns.is_empty() {
        return Err(Error::Manifest("manifest lists no feature columns".into()));
    }
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);

    let headers = csv_reader
        .headers()
        .map_err(|e| Error::Manifest(format!("cannot read header row: {e}")))?
        .clone();
    let column_index = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Manifest(format!("column {name:?} not found in header")))
    };

    let feature_idx: Vec<usize> = manifest
        .feature_columns
        .iter()
        .map(|c| column_index(c))
        .collect::<Result<_>>()?;
    let label_idx = column_index(&manifest.label_column)?;
    let followers_idx = manifest
        .followers_column
        .as_deref()
        .map(column_index)
        .transpose()?;
    let posts_idx = manifest.posts_column.as_deref().map(column_index).transpose()?;
    let created_at_index = match &manifest.created_column {
        Some(name) => Some(
            manifest
                .feature_columns
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| {
                    Error::Manifest(format!(
                        "created column {name:?} is not one of the feature columns"
                    ))
                })?,
        ),
        None => None,
    };

    let d = feature_idx.len();
    let mut values: Vec<f32> = Vec::new();
    let mut labels: Vec<Label> = Vec::new();
    let mut followers: Vec<f64> = Vec::new();
    let mut posts: Vec<f64> = Vec::new();

    for (row_number, record) in csv_reader.records().enumerate() {
        // Row numbers in errors are 1-based data rows (header excluded).
        let row = row_number + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            column: "<record>".into(),
            message: e.to_string(),
        })?;
        let cell = |idx: usize| record.get(idx).unwrap_or("");

        for (&idx, name) in feature_idx.iter().zip(&manifest.feature_columns) {
            let raw = cell(idx);
            let parsed: f32 = raw.trim().parse().map_err(|_| Error::Parse {
                row,
                column: name.clone(),
                message: format!("expected a number, got {raw:?}"),
            })?;
            values.push(parsed);
        }
        labels.push(parse_label(cell(label_idx), row, &manifest.label_column)?);

        let parse_raw = |idx: usize, name: &str, out: &mut Vec<f64>| -> Result<()> {
            let raw = cell(idx);
            let parsed: f64 = raw.trim().parse().map_err(|_| Error::Parse {
                row,
                column: name.to_string(),
                message: format!("expected a number, got {raw:?}"),
            })?;
            if parsed < 0.0 {
                return Err(Error::Parse {
                    row,
                    column: name.to_string(),
                    message: format!("raw counts must be non-negative, got {parsed}"),
                });
            }
            out.push(parsed);
            Ok(())
        };
        if let Some(idx) = followers_idx {
            parse_raw(idx, manifest.followers_column.as_deref().unwrap(), &mut followers)?;
        }
        if let Some(idx) = posts_idx {
            parse_raw(idx, manifest.posts_column.as_deref().unwrap(), &mut posts)?;
        }
    }

    let n = labels.len();
    let features = Array2::from_shape_vec((n, d), values).expect("row-major fill");
    let mut dataset = Dataset::new(features, labels, manifest.feature_columns.clone())?;
    dataset.created_at_index = created_at_index;
    if followers_idx.is_some() && posts_idx.is_some() {
        dataset.followers_raw = Some(followers);
        dataset.posts_raw = Some(posts);
    }
    dataset.validate()?;
    Ok(dataset)
}
