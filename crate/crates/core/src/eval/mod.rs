//! Train/test protocol, metrics and the feature x classifier benchmark.

mod bench;
mod metrics;
mod report;
mod split;

pub use bench::{
    prepare_features, run_benchmark, BenchConfig, BenchmarkResult, DatasetConfig, DatasetSummary,
    PreparedData, PreparedFamily,
};
pub use metrics::{metrics, ClassMetrics, ConfusionMatrix, MetricsSummary};
pub use report::{
    cell_seed, read_bundle, render_csv, render_table, write_bundle, CellConfig, CellStatus,
    EvaluationReport, Timings, DEEP_MODELS,
};
pub use split::{stratified_split, subject_split, SplitMode};
