//! Evaluation: dataset partitioning, the classification metrics,
//! per-second curves with repetition, and level-vs-level comparison.

mod curve;
mod metrics;
mod report;
mod split;

pub use curve::{
    mean_curves, per_second_curve, repeat_experiment, ExperimentConfig, ExperimentOutput,
};
pub use metrics::{metrics, ConfusionCounts, MetricRow, Metrics};
pub use report::{
    compare_levels, format_comparison, read_report_csv, write_comparison_csv, write_envelope,
    write_report_csv, Comparison, CompareRow, ReportEnvelope, REPORT_FORMAT_VERSION,
};
pub use split::{kfold, split_undersample, Fold, Split};
