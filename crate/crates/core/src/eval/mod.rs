//! Boundary metrics, the cross-validated experiment grid, report writers
//! and a unigram baseline.

mod baseline;
mod grid;
mod metrics;
mod report;
mod runner;

pub use self::baseline::{unigram_baseline_cv, UnigramLogistic};
pub use self::grid::{parse_cells, GridCell, GridSpec, DEFAULT_DIMS};
pub use self::metrics::{compute_metrics, mean_std, ConfusionCounts, MetricsReport};
pub use self::report::{emit_report, fold_rows, read_csv_report, summary_table, FoldRow, ReportFormat};
pub use self::runner::{
    run_cv, Aggregate, CellOutcome, CellResult, CvOptions, CvResults, EmbeddingSource, FoldOutcome, Progress,
};
