//! Run and judgment I/O, effectiveness measures, significance testing and
//! run comparison.

mod compare;
mod metrics;
mod qrels;
mod run;
mod stats;

pub use compare::{compare_runs, deltas_to_csv, per_query_delta, ComparisonReport, Mark, ReportRow, RunEntry};
pub use metrics::{
    evaluate, exact_metrics, exact_topic, inferred_metrics, inferred_topic, mean, per_topic, ExactMetrics,
    InferredMetrics, Metric, MetricConfig, TopicEvaluation,
};
pub use qrels::{read_qrels, Grade, SampledQrels, Stratum, TopicQrels};
pub use run::{read_run, write_run, RankedRun, MAX_RUN_DEPTH};
pub use stats::{paired_t_test, TTestResult};
