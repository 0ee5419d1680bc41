//! Configuration, named scenarios, execution and report output.

pub mod config;
pub mod heatmap;
pub mod output;
pub mod presets;
mod run;

pub use config::{
    load_config, parse_config, InitSpec, OutputSettings, ScenarioConfig, StatsSettings, StiffnessLayout,
};
pub use output::{emit_reports, emit_suite, read_cells_csv};
pub use run::{
    build_stiffness, initial_state, run_scenario, run_scenario_logged, run_suite, CellTable, ChannelSummary,
    ConservationLog, RunReport, SuiteReport,
};
