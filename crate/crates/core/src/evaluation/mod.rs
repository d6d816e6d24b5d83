//! Confusion-matrix metrics and validation-driven hyperparameter search.

mod metrics;
mod search;

pub use metrics::{
    confusion, confusion_signed, evaluate_model, format_metric, majority_baseline, metrics,
    report_row, write_report, ConfusionMatrix, MetricReport, REPORT_HEADER,
};
pub use search::{
    grid_search, random_search, Dimension, ParamSet, ParamValue, SearchOutcome, SearchSpace, Trial,
};
