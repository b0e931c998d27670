//! Experiment configs, the end-to-end pipeline, built-in demos and reports.

mod config;
mod demos;
mod report;
mod run;

pub use config::{
    load_config, print_config, Compiled, ConfigError, CxValue, Dims, DomainSpec, ExperimentConfig,
    F64Value, GridSpec, Mode, PersistenceSpec, ReportPaths, Tolerances,
};
pub use demos::{demo, DEMO_NAMES};
pub use report::{emit_report, write_reports, Format, Report};
pub use run::{
    implicitization_points, properness_grid, run_experiment, run_fibers, run_implicitize,
    ApproximantSummary, ExperimentReport, FiberPoint, FibersReport, ImplicitizationSummary,
    StageError, EXIT_CONFIG, EXIT_FAIL, EXIT_NUMERICAL, EXIT_PASS,
};
