//! Metrics, ROC analysis and the cross-validation harness.

mod harness;
mod metrics;

pub use harness::{
    fit_classifier, fit_full_imputers, fit_imputers, prepare_data, run_cv_experiment, CellMetrics,
    CellRecord, ExperimentReport, Imputers, PreparedData, RocSeries, SummaryRow, METRIC_NAMES,
    ROC_GRID_POINTS,
};
pub use metrics::{
    auc, average_curves, confusion, fpr_grid, metrics, roc_curve, tpr_at, ConfusionCounts,
    MetricFlags, Metrics, RocCurve,
};
