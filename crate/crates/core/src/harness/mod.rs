//! Experiment orchestration: the joint → split → specialize schedule, the
//! four baselines, seed repetition, and CSV/report output.

mod aggregate;
mod config;
mod grid;
mod io;
mod run;

pub use aggregate::{aggregate_runs, final_performance, median, Summary, SummaryRow, FINAL_WINDOW};
pub use config::{ExperimentConfig, GridAxes, NetworkConfig, Variant};
pub use grid::{make_grid, GridCell};
pub use io::{
    read_run_csv, read_summary_csv, render_table, write_run_csv, write_summary_csv, RUN_HEADER,
    SUMMARY_HEADER,
};
pub use run::{
    run_experiment, run_seed, run_seed_observed, ExperimentOutput, IterationRow, RunRecord,
};

pub use io::{report_dir, ReportOutput};
