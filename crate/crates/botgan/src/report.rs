//! Report assembly and emission: classification reports with impact
//! mitigation, plus CSV/JSON series writers for every figure-shaped output
//! (train logs, sweeps, percentile bands, closeness counts).

use serde::{Deserialize, Serialize};

use crate::baselines::Classifier;
use crate::config::ReportFormat;
use crate::data::Dataset;
use crate::dropout_gan::{DropoutTrainLog, SweepRow};
use crate::error::{Error, Result};
use crate::features::FeatureRanking;
use crate::gan::TrainLog;
use crate::metrics::{
    classification_metrics, impact_mitigation, impact_scores, AugmentationPoint, ClosenessRecord,
    MetricsRecord, PercentileBand,
};

/// A full classification report over one evaluation set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_rows: usize,
    pub metrics: MetricsRecord,
    /// Absent when the dataset carries nothing usable as follower/post
    /// counts.
    pub impact_mitigation: Option<f64>,
    /// True when impact fell back to scaled feature columns because raw
    /// counts were absent.
    pub scaled_impact: bool,
    pub impact_degenerate: bool,
}

/// Follower/post inputs for impact scoring: raw counts when the dataset
/// carries them, otherwise scaled feature columns found by name (flagged),
/// otherwise nothing.
fn impact_inputs(data: &Dataset, rows: &[usize]) -> Option<(Vec<f64>, Vec<f64>, bool)> {
    if let (Some(f), Some(p)) = (&data.followers_raw, &data.posts_raw) {
        let followers = rows.iter().map(|&i| f[i]).collect();
        let posts = rows.iter().map(|&i| p[i]).collect();
        return Some((followers, posts, false));
    }
    let find = |needles: &[&str]| -> Option<usize> {
        data.feature_names.iter().position(|name| {
            let lower = name.to_lowercase();
            needles.iter().any(|n| lower.contains(n))
        })
    };
    let f_col = find(&["follower"])?;
    let p_col = find(&["post", "status", "tweet"])?;
    let followers = rows
        .iter()
        .map(|&i| f64::from(data.features[[i, f_col]]))
        .collect();
    let posts = rows
        .iter()
        .map(|&i| f64::from(data.features[[i, p_col]]))
        .collect();
    Some((followers, posts, true))
}

/// Runs `classifier` over the labeled rows in `rows` and assembles the
/// metrics plus impact mitigation when follower/post data exists.
pub fn evaluate_classifier(
    classifier: &dyn Classifier,
    data: &Dataset,
    rows: &[usize],
) -> Result<EvalReport> {
    let labeled: Vec<usize> = rows
        .iter()
        .copied()
        .filter(|&i| data.labels[i].is_labeled())
        .collect();
    if labeled.is_empty() {
        return Err(Error::Domain("no labeled rows to evaluate".into()));
    }
    let predictions = classifier.predict(data.rows_f64(&labeled).view())?;
    let labels: Vec<u8> = labeled.iter().map(|&i| data.labels[i].to_byte()).collect();
    let metrics = classification_metrics(&predictions, &labels)?;

    let (mitigation, scaled, degenerate) = match impact_inputs(data, &labeled) {
        Some((followers, posts, scaled)) => {
            let scores = impact_scores(&followers, &posts)?;
            let value = impact_mitigation(&predictions, &labels, &scores.impacts())?;
            (Some(value), scaled, scores.degenerate)
        }
        None => (None, false, false),
    };

    Ok(EvalReport {
        n_rows: labeled.len(),
        metrics,
        impact_mitigation: mitigation,
        scaled_impact: scaled,
        impact_degenerate: degenerate,
    })
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

pub fn eval_report(report: &EvalReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => json(report),
        ReportFormat::Csv => {
            let mut out = String::from(
                "variant,accuracy,precision,recall,f1,impact_mitigation,scaled_impact\n",
            );
            let mitigation = report
                .impact_mitigation
                .map_or(String::new(), |m| m.to_string());
            for (variant, set) in [
                ("bot_positive", report.metrics.bot_positive),
                ("macro", report.metrics.macro_avg),
            ] {
                out.push_str(&format!(
                    "{variant},{},{},{},{},{},{}\n",
                    set.accuracy, set.precision, set.recall, set.f1, mitigation,
                    report.scaled_impact
                ));
            }
            Ok(out)
        }
    }
}

pub fn ranking_report(
    ranking: &FeatureRanking,
    names: &[String],
    format: ReportFormat,
) -> Result<String> {
    match format {
        ReportFormat::Json => {
            #[derive(Serialize)]
            struct Row<'a> {
                feature_index: usize,
                feature_name: &'a str,
                information_gain: f64,
                rank: usize,
            }
            let rows: Vec<Row> = ranking
                .order
                .iter()
                .enumerate()
                .map(|(rank, &f)| Row {
                    feature_index: f,
                    feature_name: &names[f],
                    information_gain: ranking.scores[f],
                    rank,
                })
                .collect();
            json(&rows)
        }
        ReportFormat::Csv => {
            let mut out = String::from("feature_index,feature_name,information_gain,rank\n");
            for (rank, &f) in ranking.order.iter().enumerate() {
                out.push_str(&format!(
                    "{f},{},{},{rank}\n",
                    names[f], ranking.scores[f]
                ));
            }
            Ok(out)
        }
    }
}

pub fn train_log_report(log: &TrainLog, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => json(log),
        ReportFormat::Csv => Ok(crate::gan::train_log_csv(log)),
    }
}

pub fn dropout_log_report(log: &DropoutTrainLog, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => json(log),
        ReportFormat::Csv => {
            let mut out =
                String::from("epoch,g_loss,label_unit_ratio,active_set,disc_rf_losses\n");
            for (epoch, r) in log.epochs.iter().enumerate() {
                let active = r
                    .active_set
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(" ");
                let losses = r
                    .disc_rf_losses
                    .iter()
                    .map(|l| l.map_or("inactive".to_string(), |v| v.to_string()))
                    .collect::<Vec<_>>()
                    .join(" ");
                out.push_str(&format!(
                    "{epoch},{},{},{active},{losses}\n",
                    r.g_loss, r.label_unit_ratio
                ));
            }
            Ok(out)
        }
    }
}

pub fn sweep_report(rows: &[SweepRow], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => json(&rows),
        ReportFormat::Csv => Ok(crate::dropout_gan::sweep_csv(rows)),
    }
}

pub fn augmentation_report(points: &[AugmentationPoint], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => json(&points),
        ReportFormat::Csv => {
            let mut out = String::from("fraction,test_accuracy,test_loss\n");
            for p in points {
                out.push_str(&format!(
                    "{},{},{}\n",
                    p.fraction, p.test_accuracy, p.test_loss
                ));
            }
            Ok(out)
        }
    }
}

pub fn percentile_report(bands: &[PercentileBand], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => json(&bands),
        ReportFormat::Csv => {
            let mut out = String::from("band_upper_percentile,f1\n");
            for b in bands {
                out.push_str(&format!("{},{}\n", b.band_upper_percentile, b.f1));
            }
            Ok(out)
        }
    }
}

pub fn closeness_report(records: &[ClosenessRecord], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => json(&records),
        ReportFormat::Csv => {
            let mut out = String::from("feature_index,feature_name,close_count,close_fraction\n");
            for r in records {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    r.feature_index, r.feature_name, r.close_count, r.close_fraction
                ));
            }
            Ok(out)
        }
    }
}
