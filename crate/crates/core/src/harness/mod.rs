//! Dataset splitting, synthetic data, the evaluation grid and its reports.

mod bench;
mod grid;
mod report;
mod spec;
mod split;
mod synth;

pub use bench::{bench_extractors, default_extractors, time_extractor, BenchReport, ExtractorTiming, KnnLatency};
pub use grid::{
    evaluate, extract_all, prepare_data, run_grid, BestCell, CellResult, ClassifierConfig, ConfusionMatrix,
    DatasetMeta, ExperimentReport, Progress,
};
pub use report::{emit_report, ReportFormat, CSV_HEADER};
pub use spec::{DatasetSpec, ExperimentSpec, FbpnSpec, FeatureSpec, KnnSpec, PnnSpec, SplitSpec, Subrange};
pub use split::split_dataset;
pub use synth::{builtin_templates, distort, load_templates, synth_generate, SynthConfig};
