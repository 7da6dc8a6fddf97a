//! Configuration, presets, persistence and the command drivers.

mod commands;
mod config;
mod preset;
mod snapshot;
mod table;

pub use commands::{
    compat_command, convergence_command, oracle_compare_command, oracle_dt, run_command, Outcome,
    EXIT_BLOWUP, EXIT_CLEAN, EXIT_VIOLATION,
};
pub use config::{load_config, parse_config, parse_config_with_overrides, InitialSpec, RunConfig};
pub use preset::{preset_initial, PresetOptions, PRESETS};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};
pub use table::{format_float, write_diagnostics_csv, write_table};
