//! Report files: the per-second CSV, its JSON envelope, and the
//! machine-vs-process comparison.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::MetricRow;
use crate::artifact::Stamp;
use crate::error::{Error, Result};

pub const REPORT_FORMAT_VERSION: u32 = 1;

const CSV_HEADER: [&str; 8] = [
    "t",
    "n",
    "accuracy",
    "precision",
    "recall",
    "f1",
    "fpr",
    "no_data_count",
];

/// Write a metric curve as CSV with the fixed column set.
pub fn write_report_csv(path: &Path, rows: &[MetricRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_error)?;
    writer.write_record(CSV_HEADER).map_err(csv_error)?;
    for row in rows {
        writer
            .write_record(&[
                row.t.to_string(),
                row.n.to_string(),
                format!("{:.6}", row.accuracy),
                format!("{:.6}", row.precision),
                format!("{:.6}", row.recall),
                format!("{:.6}", row.f1),
                format!("{:.6}", row.fpr),
                format!("{:.6}", row.no_data),
            ])
            .map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read a per-second CSV back into metric rows.
pub fn read_report_csv(path: &Path) -> Result<Vec<MetricRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    let headers = reader.headers().map_err(csv_error)?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::Schema(format!(
            "{}: unexpected CSV columns {:?}",
            path.display(),
            headers
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let field = |idx: usize| -> Result<f64> {
            record
                .get(idx)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Schema(format!("{}: bad CSV field", path.display())))
        };
        rows.push(MetricRow {
            t: field(0)? as u32,
            n: field(1)? as u64,
            accuracy: field(2)?,
            precision: field(3)?,
            recall: field(4)?,
            f1: field(5)?,
            fpr: field(6)?,
            no_data: field(7)?,
            degenerate: false,
        });
    }
    Ok(rows)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Schema(format!("csv: {e}"))
}

/// JSON envelope written next to each report CSV.
#[derive(Debug, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub format_version: u32,
    pub kind: String,
    pub schema_id: String,
    pub horizon: u32,
    pub repetitions: u32,
    pub master_seed: u64,
    pub run_seeds: Vec<u64>,
    /// Content hash of the evaluated matrix file, when it exists on disk.
    pub input_sha256: Option<String>,
    pub stamp: Stamp,
}

pub fn write_envelope(path: &Path, envelope: &ReportEnvelope) -> Result<()> {
    let json = serde_json::to_string_pretty(envelope)?;
    std::fs::write(path, json).map_err(|e| Error::file(path, e))
}

/// Per-second deltas between two curves (process minus machine).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub t: u32,
    pub machine_f1: f64,
    pub process_f1: f64,
    pub f1_delta: f64,
    pub machine_recall: f64,
    pub process_recall: f64,
    pub recall_delta: f64,
    pub machine_fpr: f64,
    pub process_fpr: f64,
    pub fpr_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<CompareRow>,
    pub mean_recall_delta: f64,
    pub max_fpr_machine: f64,
    pub max_fpr_process: f64,
}

/// Compare machine-level and process-level curves over their shared
/// horizon.
pub fn compare_levels(machine: &[MetricRow], process: &[MetricRow]) -> Result<Comparison> {
    let mut rows = Vec::new();
    for m in machine {
        if let Some(p) = process.iter().find(|p| p.t == m.t) {
            rows.push(CompareRow {
                t: m.t,
                machine_f1: m.f1,
                process_f1: p.f1,
                f1_delta: p.f1 - m.f1,
                machine_recall: m.recall,
                process_recall: p.recall,
                recall_delta: p.recall - m.recall,
                machine_fpr: m.fpr,
                process_fpr: p.fpr,
                fpr_delta: p.fpr - m.fpr,
            });
        }
    }
    if rows.is_empty() {
        return Err(Error::Range(
            "curves share no horizon seconds; nothing to compare".into(),
        ));
    }
    let n = rows.len() as f64;
    Ok(Comparison {
        mean_recall_delta: rows.iter().map(|r| r.recall_delta).sum::<f64>() / n,
        max_fpr_machine: rows.iter().map(|r| r.machine_fpr).fold(0.0, f64::max),
        max_fpr_process: rows.iter().map(|r| r.process_fpr).fold(0.0, f64::max),
        rows,
    })
}

/// Render a comparison as an aligned text table.
pub fn format_comparison(cmp: &Comparison) -> String {
    let mut out = String::new();
    out.push_str("   t  machine_f1  process_f1    f1_delta  recall_delta   fpr_delta\n");
    for row in &cmp.rows {
        out.push_str(&format!(
            "{:>4}  {:>10.4}  {:>10.4}  {:>+10.4}  {:>+12.4}  {:>+10.4}\n",
            row.t, row.machine_f1, row.process_f1, row.f1_delta, row.recall_delta, row.fpr_delta
        ));
    }
    out.push_str(&format!(
        "mean recall delta {:+.4}; max fpr machine {:.4}, process {:.4}\n",
        cmp.mean_recall_delta, cmp.max_fpr_machine, cmp.max_fpr_process
    ));
    out
}

pub fn write_comparison_csv(path: &Path, cmp: &Comparison) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_error)?;
    writer
        .write_record([
            "t",
            "machine_f1",
            "process_f1",
            "f1_delta",
            "machine_recall",
            "process_recall",
            "recall_delta",
            "machine_fpr",
            "process_fpr",
            "fpr_delta",
        ])
        .map_err(csv_error)?;
    for row in &cmp.rows {
        writer
            .write_record(&[
                row.t.to_string(),
                format!("{:.6}", row.machine_f1),
                format!("{:.6}", row.process_f1),
                format!("{:.6}", row.f1_delta),
                format!("{:.6}", row.machine_recall),
                format!("{:.6}", row.process_recall),
                format!("{:.6}", row.recall_delta),
                format!("{:.6}", row.machine_fpr),
                format!("{:.6}", row.process_fpr),
                format!("{:.6}", row.fpr_delta),
            ])
            .map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: u32, f1: f64, recall: f64, fpr: f64) -> MetricRow {
        MetricRow {
            t,
            n: 10,
            accuracy: 50.0,
            precision: 0.5,
            recall,
            f1,
            fpr,
            no_data: 0.0,
            degenerate: false,
        }
    }

    #[test]
    fn identical_curves_have_zero_deltas() {
        let curve = vec![row(1, 0.8, 0.7, 0.1), row(2, 0.85, 0.75, 0.08)];
        let cmp = compare_levels(&curve, &curve).unwrap();
        assert!(cmp.rows.iter().all(|r| r.f1_delta == 0.0));
        assert_eq!(cmp.mean_recall_delta, 0.0);
    }

    #[test]
    fn constant_f1_gap_shows_up_at_every_t() {
        let machine: Vec<MetricRow> = (1..=5).map(|t| row(t, 0.80, 0.7, 0.1)).collect();
        let process: Vec<MetricRow> = (1..=5).map(|t| row(t, 0.87, 0.7, 0.1)).collect();
        let cmp = compare_levels(&machine, &process).unwrap();
        for r in &cmp.rows {
            assert!((r.f1_delta - 0.07).abs() < 1e-12);
        }
    }

    #[test]
    fn disjoint_horizons_are_a_range_error() {
        let machine = vec![row(1, 0.8, 0.7, 0.1)];
        let process = vec![row(10, 0.9, 0.8, 0.05)];
        assert!(matches!(
            compare_levels(&machine, &process),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn report_csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        let rows = vec![row(1, 0.8, 0.7, 0.1), row(2, 0.85, 0.75, 0.08)];
        write_report_csv(&path, &rows).unwrap();
        let back = read_report_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].t, 1);
        assert!((back[0].f1 - 0.8).abs() < 1e-9);
        assert!((back[1].recall - 0.75).abs() < 1e-9);
    }
}
