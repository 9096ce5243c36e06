//! Experiment runner: builds instances from JSON configs, runs the solvers,
//! fits scaling slopes, scores the weighted-cost comparison, and writes rows
//! as CSV or JSON.

mod config;
mod output;
mod run;
mod study;

pub use config::{Axis, AxisName, ExperimentConfig, Format, Method};
pub use output::{
    emit_results, rows_from_csv, rows_from_json, rows_to_csv, rows_to_json, write_file, write_plot_data, CSV_HEADER,
};
pub use run::{reference_optimum, run_experiment, run_method, ResultRow, RunRecord};
pub use study::{
    loglog_fit, median, scaling_study, summarize_scaling, table1_comparison, LogLogFit, MethodCost, MethodScaling,
    ScalingPoint, ScalingSummary, Table1Summary,
};
