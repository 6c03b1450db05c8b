//! Simulation harness: frame schedules and metrics, configuration,
//! Monte-Carlo orchestration, and result output.

pub mod config;
pub mod output;
pub mod run;
pub mod schedule;

pub use config::{dbm_to_watts, SimConfig, SimConfigFile};
pub use output::{manifest_toml, timestep_csv, SweepWriter};
pub use run::{
    run_drop, run_sweep, run_sweep_streaming, summarize, DropOutput, DropRunner, DropSummary,
    RunResult, Scheme, SnrDef, SweepOptions, SweepSummary, TimestepRecord,
};
pub use schedule::{
    derive_schedule, effective_rate, fullopt_overhead, FrameSchedule, OverheadModel,
};
