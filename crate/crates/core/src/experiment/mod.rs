//! Experiment orchestration: TOML configs, the `mhd2d` subcommands, CSV
//! time series, JSON summaries and checkpoints.

pub mod config;
pub mod output;
pub mod scenario;

pub use config::{CompareConfig, DecayConfig, MsweepConfig, SimConfig, SweepScaling};
pub use output::{format_float, parse_csv, read_csv, records_to_csv, write_csv, CsvTable, Gate, NamedFit, Summary};
pub use scenario::{
    compare_at, effective_dt, initial_data, requested_dt, run_scenario, simulate, sweep_member, Comparison, Scenario,
    ScenarioOutput, SweepMember, Trajectory,
};
