//! Dataset generation, tabular I/O, and experiment reports.

mod csv;
mod report;
mod synthetic;

pub use csv::{load_csv, save_csv, save_embedding_csv, save_trace};
pub use report::{
    format_float17, load_report, save_report, DimensionSummary, ExperimentReport, FlowSummary,
    HistogramSummary, MethodMetrics, SCHEMA_VERSION,
};
pub use synthetic::{generate, DatasetKind, DatasetSpec};
