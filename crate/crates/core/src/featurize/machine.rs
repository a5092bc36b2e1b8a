//! Machine-level utilization series and their standardization.

use serde::{Deserialize, Serialize};

use super::schema::SchemaId;
use super::FeatureSequence;
use crate::error::{Error, Result};
use crate::ingest::Label;
use crate::scalar::Scalar;

/// Per-second utilization snapshot of one host.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineSnapshot {
    /// Seconds since window start.
    pub t: u32,
    pub cpu_system_pct: f64,
    pub cpu_user_pct: f64,
    pub mem_used: u64,
    pub swap_used: u64,
    pub total_procs: u32,
    pub max_pid: u32,
    pub bytes_sent: u64,
    pub bytes_recv: u64,
    pub pkts_sent: u64,
    pub pkts_recv: u64,
}

impl MachineSnapshot {
    /// The raw 10-column row in the fixed machine-schema order.
    pub fn row(&self) -> [f64; 10] {
        [
            self.cpu_system_pct,
            self.cpu_user_pct,
            self.mem_used as f64,
            self.swap_used as f64,
            f64::from(self.total_procs),
            f64::from(self.max_pid),
            self.bytes_sent as f64,
            self.bytes_recv as f64,
            self.pkts_sent as f64,
            self.pkts_recv as f64,
        ]
    }
}

/// Utilization series for one machine over one execution window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineSeries {
    pub machine: String,
    pub iteration: u32,
    pub vm_id: u32,
    pub label: Label,
    pub snapshots: Vec<MachineSnapshot>,
}

impl MachineSeries {
    pub fn source_id(&self) -> String {
        format!("iter{:03}/vm{}", self.iteration, self.vm_id)
    }
}

/// Per-column standardization statistics fitted on a training partition.
///
/// Zero-variance columns are shifted by their mean only, so standardizing
/// stays invertible everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer<S> {
    pub mean: Vec<S>,
    pub std: Vec<S>,
}

impl<S: Scalar> Standardizer<S> {
    /// Fit column means and population standard deviations.
    pub fn fit(rows: &[Vec<S>]) -> Result<Self> {
        let width = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::Shape("cannot fit statistics on zero rows".into()))?;
        let n = S::from_f64(rows.len() as f64);
        let mut mean = vec![S::zero(); width];
        for row in rows {
            if row.len() != width {
                return Err(Error::Shape(format!(
                    "row width {} differs from {width}",
                    row.len()
                )));
            }
            for (m, x) in mean.iter_mut().zip(row) {
                *m = *m + *x;
            }
        }
        for m in &mut mean {
            *m = *m / n;
        }
        let mut var = vec![S::zero(); width];
        for row in rows {
            for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
                let d = *x - *m;
                *v = *v + d * d;
            }
        }
        let std = var.into_iter().map(|v| (v / n).sqrt()).collect();
        Ok(Standardizer { mean, std })
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    /// Standardize one row in place.
    pub fn apply(&self, row: &mut [S]) {
        for ((x, m), s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
            *x = *x - *m;
            if *s > S::zero() {
                *x = *x / *s;
            }
        }
    }

    /// Undo [`Standardizer::apply`].
    pub fn invert(&self, row: &mut [S]) {
        for ((x, m), s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
            if *s > S::zero() {
                *x = *x * *s;
            }
            *x = *x + *m;
        }
    }
}

/// Encode a utilization series as one 10-wide vector per second, columns
/// in the fixed machine-schema order, standardized when training-set
/// statistics are supplied.
pub fn encode_machine(
    series: &MachineSeries,
    stats: Option<&Standardizer<f64>>,
) -> Result<FeatureSequence> {
    let label = match series.label {
        Label::Unknown => {
            return Err(Error::Schema(format!(
                "machine series {} is unlabeled",
                series.source_id()
            )))
        }
        label => label,
    };
    let mut last_t = None;
    let mut vectors = Vec::with_capacity(series.snapshots.len());
    let mut times_ms = Vec::with_capacity(series.snapshots.len());
    for snapshot in &series.snapshots {
        if let Some(prev) = last_t {
            if snapshot.t <= prev {
                return Err(Error::Ordering(format!(
                    "snapshot t={} after t={prev} is not increasing",
                    snapshot.t
                )));
            }
        }
        last_t = Some(snapshot.t);
        let mut row = snapshot.row().to_vec();
        if let Some(stats) = stats {
            if stats.width() != row.len() {
                return Err(Error::Shape(format!(
                    "statistics width {} does not match machine schema width {}",
                    stats.width(),
                    row.len()
                )));
            }
            stats.apply(&mut row);
        }
        times_ms.push(i64::from(snapshot.t) * 1000);
        vectors.push(row);
    }
    Ok(FeatureSequence {
        schema_id: SchemaId::Machine10,
        source_id: series.source_id(),
        label,
        times_ms,
        vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snapshot(t: u32, cpu_user: f64) -> MachineSnapshot {
        MachineSnapshot {
            t,
            cpu_system_pct: 2.0,
            cpu_user_pct: cpu_user,
            mem_used: 2_000_000_000,
            swap_used: 0,
            total_procs: 45,
            max_pid: 4000,
            bytes_sent: 100,
            bytes_recv: 200,
            pkts_sent: 3,
            pkts_recv: 4,
        }
    }

    fn series(snapshots: Vec<MachineSnapshot>) -> MachineSeries {
        MachineSeries {
            machine: "W7-1".to_string(),
            iteration: 0,
            vm_id: 1,
            label: Label::Benign,
            snapshots,
        }
    }

    #[test]
    fn raw_encoding_without_stats_is_identity() {
        let s = series(vec![snapshot(0, 60.0)]);
        let seq = encode_machine(&s, None).unwrap();
        assert_eq!(seq.vectors.len(), 1);
        assert_eq!(seq.vectors[0], s.snapshots[0].row().to_vec());
    }

    #[test]
    fn standardization_matches_hand_arithmetic() {
        let stats = Standardizer {
            mean: vec![0.0, 50.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            std: vec![1.0, 10.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
        };
        let s = series(vec![snapshot(0, 60.0)]);
        let seq = encode_machine(&s, Some(&stats)).unwrap();
        assert_eq!(seq.vectors[0][1], 1.0); // (60 - 50) / 10
    }

    #[test]
    fn window_length_series_has_one_vector_per_second() {
        let s = series((0..120).map(|t| snapshot(t, 10.0)).collect());
        let seq = encode_machine(&s, None).unwrap();
        assert_eq!(seq.len(), 120);
        assert_eq!(seq.times_ms[119], 119_000);
    }

    #[test]
    fn non_monotone_time_is_an_ordering_error() {
        let s = series(vec![snapshot(0, 10.0), snapshot(0, 11.0)]);
        assert!(matches!(encode_machine(&s, None), Err(Error::Ordering(_))));
    }

    #[test]
    fn zero_variance_columns_shift_by_mean_only() {
        let rows = vec![vec![5.0, 1.0], vec![5.0, 3.0]];
        let stats = Standardizer::fit(&rows).unwrap();
        assert_eq!(stats.std[0], 0.0);
        let mut row = vec![5.0, 3.0];
        stats.apply(&mut row);
        assert_eq!(row[0], 0.0); // shifted, not divided
        assert_eq!(row[1], 1.0); // (3 - 2) / 1
    }

    #[test]
    fn standardization_round_trips_within_1e9_relative() {
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|i| vec![i as f64 * 3.7, 1e9 + i as f64, 42.0])
            .collect();
        let stats = Standardizer::fit(&rows).unwrap();
        for row in &rows {
            let mut work = row.clone();
            stats.apply(&mut work);
            stats.invert(&mut work);
            for (orig, back) in row.iter().zip(&work) {
                let scale = orig.abs().max(1.0);
                assert!(
                    (orig - back).abs() / scale < 1e-9,
                    "{orig} vs {back}"
                );
            }
        }
    }
}
