//! Scenario sweeps over worlds and policies, metric aggregation and the
//! CSV, JSON and plot outputs.

mod config;
mod output;
mod run;
pub mod stats;

pub use config::{worker_threads, RunConfig, Scenario, DESK_CHANNELS_RATE, THREADS_ENV};
pub use output::{
    emit_outputs, plot_metric, read_metrics_csv, read_run_trace, replay, run_and_emit, write_metrics_csv,
    write_run_trace, Metric, OutputFiles, TraceHeader, METRICS_FILE, METRICS_HEADER, SUMMARY_FILE, TRACE_FILE,
    TRACE_VERSION,
};
pub use run::{
    aggregate, build_instance, build_world, run_scenario, train_agents, training_seed, EpisodeSummary, MetricsRow,
    ScenarioReport, TraceRecord,
};
