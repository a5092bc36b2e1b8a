//! Per-second evaluation curves and experiment repetition.

use serde::{Deserialize, Serialize};

use super::metrics::{metrics, ConfusionCounts, MetricRow};
use crate::error::{Error, Result};
use crate::featurize::FeatureSequence;
use crate::ingest::Label;
use crate::rnn::{train, RnnModel, TrainConfig};
use crate::seed::derive_seed;

/// Score every test sequence on its first `t` seconds, for each
/// `t in 1..=horizon`.
///
/// A sequence that is empty after truncation cannot be scored; it
/// defaults to benign and is counted in the row's `no_data` tally so the
/// convention stays auditable.
pub fn per_second_curve(
    model: &RnnModel<f64>,
    testset: &[FeatureSequence],
    horizon: u32,
) -> Result<Vec<MetricRow>> {
    if horizon < 1 {
        return Err(Error::Config("horizon must be at least one second".into()));
    }
    if testset.is_empty() {
        return Err(Error::Partition("empty test set".into()));
    }
    let mut rows = Vec::with_capacity(horizon as usize);
    for t in 1..=horizon {
        let mut counts = ConfusionCounts::default();
        let mut no_data = 0u64;
        for seq in testset {
            let truncated = seq.truncate_to_horizon(t);
            let predicted = if truncated.is_empty() {
                no_data += 1;
                Label::Benign
            } else {
                model.classify(&truncated)?
            };
            counts.record(predicted, seq.label);
        }
        let m = metrics(&counts)?;
        rows.push(MetricRow {
            t,
            n: counts.total(),
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            fpr: m.fpr,
            no_data: no_data as f64,
            degenerate: m.degenerate,
        });
    }
    Ok(rows)
}

/// Configuration for a repeated split/train/evaluate experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub train: TrainConfig<f64>,
    pub horizon: u32,
    pub repetitions: u32,
    pub master_seed: u64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    /// Element-wise mean of every metric at every t.
    pub mean: Vec<MetricRow>,
    /// Raw per-run curves, in run order.
    pub runs: Vec<Vec<MetricRow>>,
    /// Per-run derived seeds, for the report envelope.
    pub run_seeds: Vec<u64>,
}

/// Repeat split → train → per-second curve with derived seeds and average
/// the resulting curves element-wise.
pub fn repeat_experiment(
    dataset: &[FeatureSequence],
    config: &ExperimentConfig,
) -> Result<ExperimentOutput> {
    if config.repetitions < 1 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }
    let labels: Vec<bool> = dataset.iter().map(|s| s.label.is_malicious()).collect();
    let mut runs = Vec::with_capacity(config.repetitions as usize);
    let mut run_seeds = Vec::with_capacity(config.repetitions as usize);
    for run in 0..config.repetitions {
        let run_seed = derive_seed(config.master_seed, u64::from(run));
        run_seeds.push(run_seed);
        let result = run_once(dataset, &labels, config, run_seed)
            .map_err(|e| Error::Partition(format!("run {run}: {e}")))?;
        runs.push(result);
    }
    let mean = mean_curves(&runs);
    Ok(ExperimentOutput {
        mean,
        runs,
        run_seeds,
    })
}

fn run_once(
    dataset: &[FeatureSequence],
    labels: &[bool],
    config: &ExperimentConfig,
    run_seed: u64,
) -> Result<Vec<MetricRow>> {
    let split = super::split::split_undersample(labels, derive_seed(run_seed, 1))?;
    let train_set: Vec<FeatureSequence> =
        split.train.iter().map(|&i| dataset[i].clone()).collect();
    let test_set: Vec<FeatureSequence> = split.test.iter().map(|&i| dataset[i].clone()).collect();
    let train_config = TrainConfig {
        seed: derive_seed(run_seed, 2),
        ..config.train
    };
    let trained = train(&train_set, &train_config)?;
    per_second_curve(&trained.model, &test_set, config.horizon)
}

/// Element-wise mean of several curves sharing a horizon.
pub fn mean_curves(runs: &[Vec<MetricRow>]) -> Vec<MetricRow> {
    let horizon = runs.iter().map(Vec::len).min().unwrap_or(0);
    let n_runs = runs.len() as f64;
    (0..horizon)
        .map(|idx| {
            let rows: Vec<&MetricRow> = runs.iter().map(|run| &run[idx]).collect();
            MetricRow {
                t: rows[0].t,
                n: rows[0].n,
                accuracy: rows.iter().map(|r| r.accuracy).sum::<f64>() / n_runs,
                precision: rows.iter().map(|r| r.precision).sum::<f64>() / n_runs,
                recall: rows.iter().map(|r| r.recall).sum::<f64>() / n_runs,
                f1: rows.iter().map(|r| r.f1).sum::<f64>() / n_runs,
                fpr: rows.iter().map(|r| r.fpr).sum::<f64>() / n_runs,
                no_data: rows.iter().map(|r| r.no_data).sum::<f64>() / n_runs,
                degenerate: rows.iter().any(|r| r.degenerate),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featurize::SchemaId;
    use crate::rnn::CellKind;

    fn one_hot(slot: usize) -> Vec<f64> {
        let mut v = vec![0.0; 5];
        v[slot] = 1.0;
        v
    }

    fn seq(id: &str, label: Label, times_ms: Vec<i64>, slots: Vec<usize>) -> FeatureSequence {
        FeatureSequence {
            schema_id: SchemaId::EventOnly5,
            source_id: id.to_string(),
            label,
            vectors: slots.into_iter().map(one_hot).collect(),
            times_ms,
        }
    }

    fn constant_model(bias: f64) -> RnnModel<f64> {
        let mut model = RnnModel::zeros(CellKind::Gru, SchemaId::EventOnly5, 4);
        model.output.b = bias;
        model
    }

    fn fixture() -> Vec<FeatureSequence> {
        vec![
            seq("m1", Label::Malicious, vec![0, 700], vec![0, 1]),
            seq("m2", Label::Malicious, vec![0, 900], vec![0, 4]),
            seq("b1", Label::Benign, vec![0], vec![0]),
            seq("b2", Label::Benign, vec![0, 500], vec![0, 4]),
        ]
    }

    #[test]
    fn constant_malicious_model_has_full_recall_and_full_fpr() {
        let rows = per_second_curve(&constant_model(5.0), &fixture(), 3).unwrap();
        for row in rows {
            assert_eq!(row.recall, 1.0);
            assert_eq!(row.fpr, 1.0);
            assert_eq!(row.n, 4);
        }
    }

    #[test]
    fn constant_benign_model_has_zero_recall_and_zero_fpr() {
        let rows = per_second_curve(&constant_model(-5.0), &fixture(), 3).unwrap();
        for row in rows {
            assert_eq!(row.recall, 0.0);
            assert_eq!(row.fpr, 0.0);
        }
    }

    #[test]
    fn late_starting_malicious_sequences_default_benign_until_seen() {
        // All malicious observations begin after 5 s; a model that flags
        // everything it actually sees still scores zero recall before
        // then, and the defaults are tallied.
        let dataset = vec![
            seq("m1", Label::Malicious, vec![6_000, 7_000], vec![1, 4]),
            seq("m2", Label::Malicious, vec![6_500], vec![1]),
            seq("b1", Label::Benign, vec![0, 1_000], vec![0, 4]),
            seq("b2", Label::Benign, vec![0], vec![0]),
        ];
        let rows = per_second_curve(&constant_model(5.0), &dataset, 10).unwrap();
        for row in &rows[..5] {
            assert_eq!(row.recall, 0.0, "t={}", row.t);
            assert_eq!(row.no_data, 2.0, "t={}", row.t);
        }
        for row in &rows[6..] {
            assert_eq!(row.recall, 1.0, "t={}", row.t);
            assert_eq!(row.no_data, 0.0, "t={}", row.t);
        }
    }

    #[test]
    fn schema_mismatch_is_surfaced() {
        let model = RnnModel::zeros(CellKind::Gru, SchemaId::Machine10, 4);
        assert!(per_second_curve(&model, &fixture(), 2).is_err());
    }

    #[test]
    fn mean_of_identical_runs_is_any_run() {
        let rows = per_second_curve(&constant_model(5.0), &fixture(), 3).unwrap();
        let mean = mean_curves(&[rows.clone(), rows.clone()]);
        assert_eq!(mean, rows);
    }

    #[test]
    fn mean_lies_within_per_run_envelope() {
        let a = per_second_curve(&constant_model(5.0), &fixture(), 3).unwrap();
        let b = per_second_curve(&constant_model(-5.0), &fixture(), 3).unwrap();
        let mean = mean_curves(&[a.clone(), b.clone()]);
        for ((m, lo), hi) in mean.iter().zip(&b).zip(&a) {
            assert!(m.recall >= lo.recall.min(hi.recall));
            assert!(m.recall <= lo.recall.max(hi.recall));
            assert!(m.fpr >= lo.fpr.min(hi.fpr));
            assert!(m.fpr <= lo.fpr.max(hi.fpr));
        }
    }
}
