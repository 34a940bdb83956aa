//! Training, evaluation and the cross-validated experiment suites.

mod metrics;
mod report;
mod suites;
mod train;

pub use metrics::{evaluate, Metrics, PreparedSamples};
pub use report::{
    aggregate_rows, read_report_csv, Aggregate, EpochPolicy, ExperimentReport, ReportRow, Summary, REPORT_HEADER,
};
pub use suites::{
    connectivity_grid, cross_validate, fold_seed, generalization_test, sweep_connectivity, sweep_depth_width,
    CvSettings, FoldRun, GeneralizationResult, GENERALIZATION_ORDER,
};
pub use train::{train, EpochRecord, Topology, TrainConfig, TrainOutcome};
